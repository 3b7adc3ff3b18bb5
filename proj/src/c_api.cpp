#include "planloop.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include <json.hpp>

#include "planloop/bench.hpp"
#include "planloop/domains.hpp"
#include "planloop/error.hpp"
#include "planloop/json_io.hpp"
#include "planloop/llm.hpp"
#include "planloop/planners.hpp"
#include "planloop/refine.hpp"
#include "planloop/validate.hpp"
#include "planloop/world.hpp"

struct planloop_model {
  planloop::world::Model model;
};

namespace {

using nlohmann::json;
using planloop::Error;
using planloop::ErrorCode;

thread_local std::string last_error;

planloop_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::SyntaxError:
    case ErrorCode::UnbalancedParens:
    case ErrorCode::UnknownSection:
    case ErrorCode::DuplicateAction:
    case ErrorCode::DuplicatePredicate:
    case ErrorCode::DuplicateParameter:
    case ErrorCode::UndeclaredType:
    case ErrorCode::UndeclaredVariable:
    case ErrorCode::UnknownPredicate:
    case ErrorCode::ArityError:
    case ErrorCode::UndeclaredObject:
    case ErrorCode::NonGroundAtom:
    case ErrorCode::NegativeGoal:
    case ErrorCode::DomainMismatch:
      return PLANLOOP_ERR_PARSE;
    case ErrorCode::UnknownAction:
    case ErrorCode::ArityMismatch:
    case ErrorCode::TypeMismatch:
    case ErrorCode::NotApplicable:
    case ErrorCode::FeedbackOnValid:
    case ErrorCode::NotCookingDomain:
    case ErrorCode::AlreadyEnriched:
    case ErrorCode::NoMutationPossible:
      return PLANLOOP_ERR_MODEL;
    case ErrorCode::TranslationFailed:
    case ErrorCode::TemplateMismatch:
    case ErrorCode::UnparseableVerdict:
      return PLANLOOP_ERR_TRANSLATION;
    case ErrorCode::BackendFailure:
    case ErrorCode::EmptyPlan:
      return PLANLOOP_ERR_BACKEND;
    case ErrorCode::Transport:
    case ErrorCode::RateLimited:
    case ErrorCode::ReplayMiss:
    case ErrorCode::EmptyResponse:
      return PLANLOOP_ERR_LLM;
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidSpec:
    case ErrorCode::UnknownTaskKind:
    case ErrorCode::InconsistentGrid:
      return PLANLOOP_ERR_CONFIG;
    case ErrorCode::Io:
      return PLANLOOP_ERR_IO;
  }
  return PLANLOOP_ERR_INTERNAL;
}

planloop_status fail(planloop_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

char* copy_out(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (out != nullptr) std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

planloop_status put(char** out, const std::string& text) {
  *out = copy_out(text);
  if (*out == nullptr) return fail(PLANLOOP_ERR_INTERNAL, "out of memory");
  return PLANLOOP_OK;
}

// Runs `body`, translating exceptions into status codes and last_error.
template <class F>
planloop_status guarded(F&& body) {
  last_error.clear();
  try {
    return body();
  } catch (const Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const json::exception& e) {
    return fail(PLANLOOP_ERR_INVALID_ARGUMENT, std::string("ConfigError: malformed JSON: ") + e.what());
  } catch (const std::bad_alloc&) {
    return fail(PLANLOOP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PLANLOOP_ERR_INTERNAL, e.what());
  }
}

json parse_options(const char* text) {
  if (text == nullptr || *text == '\0') return json::object();
  json value = json::parse(text);
  if (!value.is_object()) throw Error(ErrorCode::ConfigError, "options must be a JSON object");
  return value;
}

std::shared_ptr<const planloop::llm::Client> env_client() {
  return planloop::llm::make_client(planloop::llm::config_from_env());
}

}  // namespace

extern "C" {

const char* planloop_version(void) { return "1.0.0"; }

const char* planloop_last_error(void) { return last_error.c_str(); }

void planloop_string_free(char* s) { std::free(s); }

planloop_status planloop_parse_domain(const char* domain_text, char** out_json) {
  if (out_json == nullptr) return fail(PLANLOOP_ERR_INVALID_ARGUMENT, "out_json is NULL");
  *out_json = nullptr;
  if (domain_text == nullptr) return fail(PLANLOOP_ERR_INVALID_ARGUMENT, "domain_text is NULL");
  return guarded([&] {
    auto domain = planloop::pddl::parse_domain(domain_text);
    json out = {{"canonical", planloop::pddl::print_domain(domain)},
                {"ast", planloop::json_io::to_json(domain)}};
    return put(out_json, out.dump());
  });
}

planloop_status planloop_parse_problem(const char* domain_text, const char* problem_text, char** out_json) {
  if (out_json == nullptr) return fail(PLANLOOP_ERR_INVALID_ARGUMENT, "out_json is NULL");
  *out_json = nullptr;
  if (domain_text == nullptr || problem_text == nullptr) {
    return fail(PLANLOOP_ERR_INVALID_ARGUMENT, "domain_text or problem_text is NULL");
  }
  return guarded([&] {
    auto domain = planloop::pddl::parse_domain(domain_text);
    auto problem = planloop::pddl::parse_problem(problem_text, domain);
    json out = {{"canonical", planloop::pddl::print_problem(problem)},
                {"ast", planloop::json_io::to_json(problem)}};
    return put(out_json, out.dump());
  });
}

planloop_status planloop_model_create(const char* domain_text, const char* problem_text,
                                      planloop_model** out_model) {
  if (out_model == nullptr) return fail(PLANLOOP_ERR_INVALID_ARGUMENT, "out_model is NULL");
  *out_model = nullptr;
  if (domain_text == nullptr || problem_text == nullptr) {
    return fail(PLANLOOP_ERR_INVALID_ARGUMENT, "domain_text or problem_text is NULL");
  }
  return guarded([&] {
    *out_model = new planloop_model{planloop::world::load_model(domain_text, problem_text)};
    return PLANLOOP_OK;
  });
}

void planloop_model_destroy(planloop_model* model) { delete model; }

planloop_status planloop_validate(const planloop_model* model, const char* plan_text, int* out_valid,
                                  char** out_verdict_json) {
  if (out_verdict_json != nullptr) *out_verdict_json = nullptr;
  if (model == nullptr || plan_text == nullptr || out_valid == nullptr) {
    return fail(PLANLOOP_ERR_INVALID_ARGUMENT, "model, plan_text and out_valid are required");
  }
  return guarded([&] {
    using namespace planloop;
    world::Plan plan = planners::adapt_arguments(world::parse_plan(plan_text), model->model);
    validate::Verdict verdict =
        validate::validate_plan(model->model, plan, validate::default_rules(model->model));
    *out_valid = verdict.valid() ? 1 : 0;
    if (out_verdict_json == nullptr) return PLANLOOP_OK;
    return put(out_verdict_json, json_io::to_json(verdict, model->model).dump());
  });
}

planloop_status planloop_solve(const planloop_model* model, const char* options_json, char** out_plan_json) {
  if (out_plan_json == nullptr) return fail(PLANLOOP_ERR_INVALID_ARGUMENT, "out_plan_json is NULL");
  *out_plan_json = nullptr;
  if (model == nullptr) return fail(PLANLOOP_ERR_INVALID_ARGUMENT, "model is NULL");
  return guarded([&] {
    using namespace planloop;
    json options = parse_options(options_json);
    std::string planner = options.value("planner", std::string("oracle"));
    world::Plan plan;
    if (planner == "oracle") {
      plan = planners::oracle_plan(model->model);
    } else if (planner == "bfs") {
      std::size_t depth = options.value("max_depth", std::size_t{16});
      world::Model searched = model->model;
      if (searched.domain.name == "cooking" && searched.domain.find_predicate("unused") == nullptr) {
        searched = domains::enrich_cooking(searched);
      }
      planners::SearchResult result = planners::bfs_plan(searched, depth);
      if (!result.plan) return fail(PLANLOOP_ERR_BACKEND, "BackendFailure: no plan found: " + result.reason);
      plan = *result.plan;
    } else {
      throw Error(ErrorCode::ConfigError, "unknown planner '" + planner + "' (oracle or bfs)");
    }
    return put(out_plan_json, json_io::to_json(plan).dump());
  });
}

planloop_status planloop_generate(const char* spec_json, char** out_json) {
  if (out_json == nullptr) return fail(PLANLOOP_ERR_INVALID_ARGUMENT, "out_json is NULL");
  *out_json = nullptr;
  if (spec_json == nullptr) return fail(PLANLOOP_ERR_INVALID_ARGUMENT, "spec_json is NULL");
  return guarded([&] {
    using namespace planloop;
    json spec = parse_options(spec_json);
    auto kind = domains::parse_task_kind(spec.at("kind").get<std::string>());
    int n = spec.value("n", 3);
    std::uint64_t seed = spec.value("seed", std::uint64_t{0});
    int count = spec.value("count", 1);
    json out = json::array();
    for (const domains::Instance& instance : domains::gen_batch(kind, n, seed, count)) {
      out.push_back(json_io::to_json(instance));
    }
    return put(out_json, out.dump());
  });
}

planloop_status planloop_translate(const char* nl_text, const char* options_json, char** out_json) {
  if (out_json == nullptr) return fail(PLANLOOP_ERR_INVALID_ARGUMENT, "out_json is NULL");
  *out_json = nullptr;
  if (nl_text == nullptr) return fail(PLANLOOP_ERR_INVALID_ARGUMENT, "nl_text is NULL");
  return guarded([&] {
    using namespace planloop;
    json options = parse_options(options_json);
    auto translator = refine::parse_translator_kind(options.value("translator", std::string("reference")));
    domains::Translation translation;
    if (translator == refine::TranslatorKind::Reference) {
      translation = domains::reference_translate(nl_text);
    } else {
      auto client = env_client();
      std::string response = client->complete(prompts::build_translator_prompt(nl_text).messages());
      translation = refine::parse_translation(response);
    }
    json out = {{"kind", std::string(domains::to_string(translation.kind))},
                {"domain", pddl::print_domain(translation.domain)},
                {"problem", pddl::print_problem(translation.problem)}};
    return put(out_json, out.dump());
  });
}

planloop_status planloop_run_isr(const char* config_json, char** out_json) {
  if (out_json == nullptr) return fail(PLANLOOP_ERR_INVALID_ARGUMENT, "out_json is NULL");
  *out_json = nullptr;
  if (config_json == nullptr) return fail(PLANLOOP_ERR_INVALID_ARGUMENT, "config_json is NULL");
  return guarded([&] {
    using namespace planloop;
    json options = parse_options(config_json);
    int max_refinements = options.value("max_refinements", 10);
    refine::IsrConfig config;
    if (options.contains("method")) {
      config = bench::method_config(bench::parse_method(options["method"].get<std::string>()), max_refinements);
    } else {
      config.max_refinements = max_refinements;
    }
    json overrides = options;
    overrides.erase("max_refinements");
    config = json_io::isr_config_from_json(overrides, config);

    std::optional<domains::Instance> instance;
    std::uint64_t seed = options.value("seed", std::uint64_t{0});
    if (options.contains("instance")) {
      instance = json_io::instance_from_json(options["instance"]);
      seed = instance->spec.seed;
    } else if (!options.contains("nl_text")) {
      domains::InstanceSpec spec{domains::parse_task_kind(options.value("kind", std::string("cooking"))),
                                 options.value("n", 3), seed};
      instance = domains::gen_instance(spec);
    }

    bool needs_client = config.planner_kind == "llm" || config.translator_kind == refine::TranslatorKind::Llm ||
                        config.validator_kind == refine::ValidatorKind::SelfLlm;
    std::shared_ptr<const llm::Client> client = needs_client ? env_client() : nullptr;
    refine::Backends backends{planners::make_backend(config.planner_kind, seed, client), client};
    refine::Transcript transcript =
        instance ? refine::run_pipeline(*instance, config, backends)
                 : refine::run_pipeline(options["nl_text"].get<std::string>(), config, backends);
    return put(out_json, json_io::to_json(transcript).dump());
  });
}

planloop_status planloop_run_bench(const char* config_json, char** out_json) {
  if (out_json == nullptr) return fail(PLANLOOP_ERR_INVALID_ARGUMENT, "out_json is NULL");
  *out_json = nullptr;
  if (config_json == nullptr) return fail(PLANLOOP_ERR_INVALID_ARGUMENT, "config_json is NULL");
  return guarded([&] {
    using namespace planloop;
    bench::BenchConfig config = json_io::bench_config_from_json(parse_options(config_json));
    bool needs_client = config.planner == "llm" || config.translator == refine::TranslatorKind::Llm ||
                        config.method == bench::MethodKind::IsrSelf;
    std::shared_ptr<const llm::Client> client = needs_client ? env_client() : nullptr;
    bench::BenchResult result = bench::run_bench(config, bench::default_factory(config, client));
    return put(out_json, json_io::to_json(result).dump());
  });
}

planloop_status planloop_emit_table(const char* results_json, const char* format, const char* layout,
                                    char** out_text) {
  if (out_text == nullptr) return fail(PLANLOOP_ERR_INVALID_ARGUMENT, "out_text is NULL");
  *out_text = nullptr;
  if (results_json == nullptr) return fail(PLANLOOP_ERR_INVALID_ARGUMENT, "results_json is NULL");
  return guarded([&] {
    using namespace planloop;
    json parsed = json::parse(results_json);
    if (!parsed.is_array()) throw Error(ErrorCode::ConfigError, "results must be a JSON array");
    std::vector<bench::BenchResult> results;
    for (const json& r : parsed) results.push_back(json_io::bench_result_from_json(r));
    bench::TableFormat fmt = bench::parse_table_format(format == nullptr ? "markdown" : format);
    std::string lay = layout == nullptr ? "method" : layout;
    bench::TableLayout table_layout;
    if (lay == "method") {
      table_layout = bench::TableLayout::ByMethod;
    } else if (lay == "translator") {
      table_layout = bench::TableLayout::ByTranslator;
    } else {
      throw Error(ErrorCode::ConfigError, "unknown layout '" + lay + "' (method or translator)");
    }
    return put(out_text, bench::emit_table(results, fmt, table_layout));
  });
}

}  // extern "C"
