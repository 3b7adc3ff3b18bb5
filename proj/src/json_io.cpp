#include "planloop/json_io.hpp"

#include "planloop/error.hpp"

namespace planloop::json_io {

namespace {

json strings(const std::vector<std::string>& items) {
  json out = json::array();
  for (const std::string& s : items) out.push_back(s);
  return out;
}

json typed_names(const std::vector<pddl::TypedName>& names) {
  json out = json::array();
  for (const auto& n : names) out.push_back({{"name", n.name}, {"type", n.type}});
  return out;
}

json literals(const std::vector<pddl::Literal>& lits) {
  json out = json::array();
  for (const auto& l : lits) out.push_back(pddl::to_string(l));
  return out;
}

json atoms(const std::vector<pddl::Atom>& list) {
  json out = json::array();
  for (const auto& a : list) out.push_back(pddl::to_string(a));
  return out;
}

json exchange(const refine::Exchange& e) {
  json prompt = json::array();
  for (const llm::ChatMessage& m : e.prompt) {
    prompt.push_back({{"role", std::string(llm::to_string(m.role))}, {"content", m.content}});
  }
  return {{"prompt", prompt}, {"response", e.response}};
}

json optional_exchange(const std::optional<refine::Exchange>& e) { return e ? exchange(*e) : json(nullptr); }

json verdict_json(const validate::Verdict& verdict, const std::string* feedback) {
  json out;
  out["outcome"] = verdict.valid() ? "valid" : "invalid";
  out["failing_step"] = verdict.failing_step ? json(*verdict.failing_step) : json(nullptr);
  if (verdict.reason) {
    out["reason"] = std::string(validate::reason_kind(*verdict.reason));
    auto action = validate::blamed_action(*verdict.reason);
    out["action"] = action ? json(world::to_string(*action)) : json(nullptr);
    out["literals"] = strings(validate::reason_literals(*verdict.reason));
    if (const auto* rule = std::get_if<validate::DomainRuleViolated>(&*verdict.reason)) out["rule"] = rule->rule;
    if (const auto* self = std::get_if<validate::SelfReported>(&*verdict.reason)) {
      out["explanation"] = self->explanation;
    }
  } else {
    out["reason"] = nullptr;
    out["action"] = nullptr;
    out["literals"] = json::array();
  }
  out["feedback"] = feedback ? json(*feedback) : json(nullptr);
  out["feedback_template_version"] = validate::kFeedbackTemplateVersion;
  if (!verdict.state_trace.empty()) {
    json trace = json::array();
    for (const world::State& s : verdict.state_trace) {
      json state = json::array();
      for (const auto& a : s.atoms) state.push_back(world::to_string(a));
      trace.push_back(state);
    }
    out["state_trace"] = trace;
  }
  return out;
}

template <class T>
T get_or(const json& value, const char* key, T fallback) {
  auto it = value.find(key);
  if (it == value.end() || it->is_null()) return fallback;
  return it->get<T>();
}

json meta_json(const domains::InstanceMeta& meta) {
  if (const auto* m = std::get_if<domains::CookingMeta>(&meta)) return {{"recipes", m->recipes}};
  if (const auto* m = std::get_if<domains::BlocksMeta>(&meta)) {
    return {{"towers", m->towers}, {"goal_tower", m->goal_tower}};
  }
  const auto& m = std::get<domains::BallMeta>(meta);
  return {{"robot_room", m.robot_room}, {"start_rooms", m.start_rooms}, {"goal_rooms", m.goal_rooms}};
}

}  // namespace

json to_json(const world::Plan& plan) {
  json out = json::array();
  for (const auto& a : plan) out.push_back(world::to_string(a));
  return out;
}

world::Plan plan_from_json(const json& value) {
  if (!value.is_array()) throw Error(ErrorCode::SyntaxError, "plan JSON must be an array of strings");
  world::Plan plan;
  for (const json& item : value) {
    if (!item.is_string()) throw Error(ErrorCode::SyntaxError, "plan JSON must be an array of strings");
    plan.push_back(world::parse_action(item.get<std::string>()));
  }
  return plan;
}

json to_json(const pddl::DomainDef& domain) {
  json predicates = json::array();
  for (const auto& p : domain.predicates) predicates.push_back({{"name", p.name}, {"params", typed_names(p.params)}});
  json actions = json::array();
  for (const auto& a : domain.actions) {
    actions.push_back({{"name", a.name},
                       {"params", typed_names(a.params)},
                       {"precondition", literals(a.precondition)},
                       {"effects", literals(a.effects)}});
  }
  return {{"name", domain.name}, {"types", domain.types}, {"predicates", predicates}, {"actions", actions}};
}

json to_json(const pddl::ProblemDef& problem) {
  return {{"name", problem.name},
          {"domain", problem.domain_name},
          {"objects", typed_names(problem.objects)},
          {"init", atoms(problem.init)},
          {"goal", atoms(problem.goal)}};
}

json to_json(const validate::Verdict& verdict, const world::Model& model) {
  if (verdict.valid()) return verdict_json(verdict, nullptr);
  std::string feedback = validate::render_feedback(verdict, model);
  return verdict_json(verdict, &feedback);
}

json to_json(const domains::Instance& instance) {
  return {{"kind", std::string(domains::to_string(instance.spec.kind))},
          {"n", instance.spec.n},
          {"seed", instance.spec.seed},
          {"nl_text", instance.nl_text},
          {"domain_text", instance.domain_text},
          {"problem_text", instance.problem_text},
          {"meta", meta_json(instance.meta)}};
}

domains::Instance instance_from_json(const json& value) {
  try {
    domains::InstanceSpec spec{domains::parse_task_kind(value.at("kind").get<std::string>()),
                               value.at("n").get<int>(), value.at("seed").get<std::uint64_t>()};
    const json& meta = value.at("meta");
    domains::InstanceMeta m;
    switch (spec.kind) {
      case domains::TaskKind::Cooking:
        m = domains::CookingMeta{meta.at("recipes").get<std::vector<std::vector<int>>>()};
        break;
      case domains::TaskKind::Blocksworld:
        m = domains::BlocksMeta{meta.at("towers").get<std::vector<std::vector<int>>>(),
                                meta.at("goal_tower").get<std::vector<int>>()};
        break;
      case domains::TaskKind::BallMoving:
        m = domains::BallMeta{meta.at("robot_room").get<int>(), meta.at("start_rooms").get<std::vector<int>>(),
                              meta.at("goal_rooms").get<std::vector<int>>()};
        break;
    }
    return domains::make_instance(spec, m);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed instance JSON: ") + e.what());
  }
}

json to_json(const refine::IsrConfig& config) {
  return {{"max_refinements", config.max_refinements},
          {"validator", std::string(refine::to_string(config.validator_kind))},
          {"translator", std::string(refine::to_string(config.translator_kind))},
          {"planner", config.planner_kind},
          {"keep_state_traces", config.keep_state_traces}};
}

refine::IsrConfig isr_config_from_json(const json& value, refine::IsrConfig base) {
  try {
    base.max_refinements = get_or(value, "max_refinements", base.max_refinements);
    if (value.contains("validator")) base.validator_kind = refine::parse_validator_kind(value["validator"].get<std::string>());
    if (value.contains("translator")) base.translator_kind = refine::parse_translator_kind(value["translator"].get<std::string>());
    base.planner_kind = get_or(value, "planner", base.planner_kind);
    base.keep_state_traces = get_or(value, "keep_state_traces", base.keep_state_traces);
    return base;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed config JSON: ") + e.what());
  }
}

json to_json(const refine::Transcript& t) {
  json out;
  out["schema_version"] = refine::kTranscriptSchemaVersion;
  out["instance"] = t.instance ? to_json(*t.instance) : json(nullptr);
  out["nl_text"] = t.nl_text;
  out["config"] = to_json(t.config);
  out["planner"] = t.planner_name;
  out["translation"] = {{"domain_text", t.domain_text},
                        {"problem_text", t.problem_text},
                        {"exchange", optional_exchange(t.translation)}};
  json iterations = json::array();
  for (const refine::IterationRecord& r : t.records) {
    iterations.push_back({{"index", r.index},
                          {"planner_exchange", optional_exchange(r.planner)},
                          {"validator_exchange", optional_exchange(r.validator)},
                          {"plan", to_json(r.plan)},
                          {"verdict", verdict_json(r.verdict, r.verdict.valid() ? nullptr : &r.feedback)}});
  }
  out["iterations"] = iterations;
  out["final_plan"] = to_json(t.final_plan);
  out["outcome"] = t.success() ? "success" : "failure";
  out["failure_reason"] = t.failure_reason.empty() ? json(nullptr) : json(t.failure_reason);
  out["final_check"] = t.final_check ? json(*t.final_check) : json(nullptr);
  return out;
}

json to_json(const bench::BenchConfig& c) {
  return {{"kind", std::string(domains::to_string(c.kind))},
          {"n", c.n},
          {"num_cases", c.num_cases},
          {"base_seed", c.base_seed},
          {"method", std::string(bench::to_string(c.method))},
          {"translator", std::string(refine::to_string(c.translator))},
          {"planner", c.planner},
          {"max_refinements", c.max_refinements},
          {"group", c.group},
          {"max_in_flight", c.max_in_flight},
          {"transcripts_dir", c.transcripts_dir}};
}

bench::BenchConfig bench_config_from_json(const json& value, bench::BenchConfig base) {
  try {
    if (value.contains("kind")) base.kind = domains::parse_task_kind(value["kind"].get<std::string>());
    base.n = get_or(value, "n", base.n);
    base.num_cases = get_or(value, "num_cases", base.num_cases);
    base.base_seed = get_or(value, "base_seed", base.base_seed);
    if (value.contains("method")) base.method = bench::parse_method(value["method"].get<std::string>());
    if (value.contains("translator")) base.translator = refine::parse_translator_kind(value["translator"].get<std::string>());
    base.planner = get_or(value, "planner", base.planner);
    base.max_refinements = get_or(value, "max_refinements", base.max_refinements);
    base.group = get_or(value, "group", base.group);
    base.max_in_flight = get_or(value, "max_in_flight", base.max_in_flight);
    base.transcripts_dir = get_or(value, "transcripts_dir", base.transcripts_dir);
    return base;
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what(), e.code());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed bench config JSON: ") + e.what());
  }
}

json to_json(const bench::BenchResult& r) {
  json cases = json::array();
  for (const bench::CaseResult& c : r.cases) {
    cases.push_back({{"seed", c.seed},
                     {"success", c.success},
                     {"iterations", c.iterations},
                     {"failure_reason", c.failure_reason.empty() ? json(nullptr) : json(c.failure_reason)}});
  }
  return {{"config", to_json(r.config)},
          {"cases", cases},
          {"successes", r.successes},
          {"success_rate", r.success_rate},
          {"wall_seconds", r.wall_seconds}};
}

bench::BenchResult bench_result_from_json(const json& value) {
  try {
    bench::BenchResult r;
    r.config = bench_config_from_json(value.at("config"));
    for (const json& c : value.at("cases")) {
      r.cases.push_back(bench::CaseResult{c.at("seed").get<std::uint64_t>(), c.at("success").get<bool>(),
                                          get_or<std::size_t>(c, "iterations", 0),
                                          get_or<std::string>(c, "failure_reason", "")});
    }
    r.successes = static_cast<std::size_t>(
        std::count_if(r.cases.begin(), r.cases.end(), [](const bench::CaseResult& c) { return c.success; }));
    r.success_rate = r.cases.empty() ? 0.0 : static_cast<double>(r.successes) / static_cast<double>(r.cases.size());
    r.wall_seconds = get_or(value, "wall_seconds", 0.0);
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed bench result JSON: ") + e.what());
  }
}

}  // namespace planloop::json_io
