#include "planloop/refine.hpp"

#include <algorithm>
#include <cctype>

#include "planloop/error.hpp"
#include "planloop/prompts.hpp"

namespace planloop::refine {

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view text) {
  std::size_t b = text.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  std::size_t e = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(b, e - b + 1));
}

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    out.push_back(trim(text.substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

// The first "(name args)" at the start of a line, when name is an action.
std::optional<world::GroundAction> leading_action(const std::string& line, const world::Model& model) {
  if (line.empty() || line.front() != '(') return std::nullopt;
  std::size_t close = line.find(')');
  if (close == std::string::npos) return std::nullopt;
  try {
    world::GroundAction action = world::parse_action(std::string_view(line).substr(0, close + 1));
    if (model.domain.find_action(action.name) == nullptr) return std::nullopt;
    return planners::adapt_arguments(action, model);
  } catch (const Error&) {
    return std::nullopt;
  }
}

// Cuts one "(define ...)" form out of free text. Model output (like the
// appendix answers) drops closing parens, so missing ones are supplied: a
// section opener "(:" always sits directly inside define, and the end of the
// text closes whatever is still open.
std::string cut_form(const std::string& text, std::size_t start) {
  std::string form;
  long depth = 0;
  std::size_t kept = 0;  // length of `form` up to its last ')'
  for (std::size_t i = start; i < text.size(); ++i) {
    char c = text[i];
    if (c == '(' && i + 1 < text.size() && text[i + 1] == ':') {
      for (; depth > 1; --depth) form += ')';
      kept = form.size();
    }
    form += c;
    if (c == '(') ++depth;
    if (c == ')') {
      --depth;
      kept = form.size();
      if (depth == 0) return form;
    }
  }
  form.resize(kept);
  depth = 0;
  for (char c : form) depth += c == '(' ? 1 : c == ')' ? -1 : 0;
  form.append(static_cast<std::size_t>(std::max(depth, 0L)), ')');
  return form;
}

validate::Verdict self_reported(std::optional<world::GroundAction> action, std::optional<std::size_t> step,
                                std::string explanation) {
  validate::Verdict v;
  v.outcome = validate::Outcome::Invalid;
  v.failing_step = step;
  v.reason = validate::SelfReported{std::move(action), std::move(explanation)};
  return v;
}

struct Translated {
  std::string domain_text;
  std::string problem_text;
  world::Model model;
};

Translated translate(std::string_view nl_text, const IsrConfig& config, const Backends& backends,
                     Transcript& transcript) {
  domains::Translation translation;
  try {
    if (config.translator_kind == TranslatorKind::Reference) {
      translation = domains::reference_translate(nl_text);
    } else {
      prompts::PromptBundle bundle = prompts::build_translator_prompt(nl_text);
      Exchange exchange{bundle.messages(), {}};
      exchange.response = backends.llm->complete(exchange.prompt);
      transcript.translation = exchange;
      translation = parse_translation(exchange.response);
    }
    Translated out{pddl::print_domain(translation.domain), pddl::print_problem(translation.problem),
                   world::make_model(translation.domain, translation.problem)};
    return out;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::TranslationFailed) throw;
    throw Error(ErrorCode::TranslationFailed, e.what(), e.code());
  }
}

Transcript run(const std::optional<domains::Instance>& instance, std::string_view nl_text,
               const IsrConfig& config, const Backends& backends) {
  if (config.max_refinements < 0) throw Error(ErrorCode::ConfigError, "max_refinements must be >= 0");
  if (!backends.planner) throw Error(ErrorCode::ConfigError, "no planner backend");
  if ((config.translator_kind == TranslatorKind::Llm || config.validator_kind == ValidatorKind::SelfLlm) &&
      !backends.llm) {
    throw Error(ErrorCode::ConfigError, "the LLM translator and self-validator need an LLM client");
  }

  Transcript t;
  t.instance = instance;
  t.nl_text = std::string(nl_text);
  t.config = config;
  t.planner_name = backends.planner->name();

  Translated translated;
  try {
    translated = translate(nl_text, config, backends, t);
  } catch (const Error& e) {
    t.outcome = FinalOutcome::Failure;
    t.failure_reason = e.what();
    return t;
  }
  t.domain_text = translated.domain_text;
  t.problem_text = translated.problem_text;

  // The external validator checks against the ground truth when there is one.
  world::Model truth = instance ? world::load_model(instance->domain_text, instance->problem_text)
                                : translated.model;
  std::vector<validate::DomainRule> rules = validate::default_rules(truth);
  validate::ValidateOptions options{config.keep_state_traces};

  std::optional<planners::PriorAttempt> prior;
  bool produced = false;
  for (int k = 0; k <= config.max_refinements; ++k) {
    planners::PlanRequest request{translated.model, translated.domain_text, translated.problem_text, prior,
                                  std::string(nl_text)};
    IterationRecord record;
    record.index = static_cast<std::size_t>(k) + 1;
    try {
      planners::PlanResponse response = backends.planner->produce(request);
      if (!response.prompt.empty()) record.planner = Exchange{response.prompt, response.raw_response};
      record.plan = std::move(response.plan);
      if (config.validator_kind == ValidatorKind::External) {
        record.verdict = validate::validate_plan(truth, record.plan, rules, options);
      } else {
        Exchange exchange;
        record.verdict = self_validate(translated.model, record.plan, *backends.llm, &exchange);
        record.validator = std::move(exchange);
      }
    } catch (const Error& e) {
      t.outcome = FinalOutcome::Failure;
      t.failure_reason = e.what();
      break;
    }
    produced = true;
    t.final_plan = record.plan;
    bool valid = record.verdict.valid();
    if (!valid) record.feedback = validate::render_feedback(record.verdict, translated.model);
    t.records.push_back(record);
    if (valid) {
      t.outcome = FinalOutcome::Success;
      t.failure_reason.clear();
      break;
    }
    t.outcome = FinalOutcome::Failure;
    t.failure_reason = "refinement budget exhausted after " + std::to_string(t.records.size()) + " attempt(s)";
    prior = planners::PriorAttempt{t.records.back().plan, t.records.back().feedback,
                                   t.records.back().verdict.failing_step};
  }
  if (produced) t.final_check = validate::validate_plan(truth, t.final_plan, rules).valid();
  return t;
}

}  // namespace

std::string_view to_string(ValidatorKind kind) {
  return kind == ValidatorKind::External ? "external" : "self";
}

std::string_view to_string(TranslatorKind kind) {
  return kind == TranslatorKind::Reference ? "reference" : "llm";
}

ValidatorKind parse_validator_kind(std::string_view name) {
  std::string s = lower(name);
  if (s == "external") return ValidatorKind::External;
  if (s == "self" || s == "self-llm" || s == "selfllm") return ValidatorKind::SelfLlm;
  throw Error(ErrorCode::ConfigError, "unknown validator '" + std::string(name) + "' (external or self)");
}

TranslatorKind parse_translator_kind(std::string_view name) {
  std::string s = lower(name);
  if (s == "reference") return TranslatorKind::Reference;
  if (s == "llm") return TranslatorKind::Llm;
  throw Error(ErrorCode::ConfigError, "unknown translator '" + std::string(name) + "' (reference or llm)");
}

Transcript run_pipeline(const domains::Instance& instance, const IsrConfig& config, const Backends& backends) {
  return run(instance, instance.nl_text, config, backends);
}

Transcript run_pipeline(std::string_view nl_text, const IsrConfig& config, const Backends& backends) {
  return run(std::nullopt, nl_text, config, backends);
}

validate::Verdict parse_self_verdict(std::string_view response, const world::Model& model) {
  std::vector<std::string> lines = lines_of(response);
  std::optional<std::size_t> answer_line;
  std::string answer;
  for (std::size_t i = lines.size(); i-- > 0;) {
    std::string l = lower(lines[i]);
    std::size_t at = l.find("final answer:");
    if (at == std::string::npos) continue;
    answer_line = i;
    answer = trim(std::string_view(lines[i]).substr(at + 13));
    for (std::size_t j = i + 1; answer.empty() && j < lines.size(); ++j) answer = lines[j];
    break;
  }
  std::string verdict_word = lower(answer.substr(0, answer.find_first_of(" ,.!")));
  if (!answer_line || (verdict_word != "yes" && verdict_word != "no")) {
    return self_reported(std::nullopt, std::nullopt,
                         "UnparseableVerdict: the response has no final Yes/No answer");
  }
  if (verdict_word == "yes") return validate::Verdict{};

  std::size_t count = 0;
  std::optional<world::GroundAction> last;
  for (std::size_t i = 0; i < *answer_line; ++i) {
    if (auto action = leading_action(lines[i], model)) {
      ++count;
      last = std::move(action);
    }
    std::string l = lower(lines[i]);
    if (l.find("is wrong") != std::string::npos && l.find("sequence is wrong") == std::string::npos) {
      if (last) return self_reported(last, count, lines[i]);
      break;
    }
  }
  return self_reported(std::nullopt, std::nullopt, answer);
}

validate::Verdict self_validate(const world::Model& model, const world::Plan& plan, const llm::Client& client,
                                Exchange* exchange) {
  prompts::PromptBundle bundle = prompts::build_validator_prompt(model, plan);
  std::vector<llm::ChatMessage> messages = bundle.messages();
  std::string response = client.complete(messages);
  if (exchange != nullptr) *exchange = Exchange{messages, response};
  return parse_self_verdict(response, model);
}

domains::Translation parse_translation(std::string_view response) {
  std::string text(response);
  std::string low = lower(text);
  std::size_t d = low.find("(define (domain");
  std::size_t p = low.find("(define (problem");
  if (d == std::string::npos || p == std::string::npos) {
    throw Error(ErrorCode::TranslationFailed, "response lacks a domain or problem definition");
  }
  std::string domain_text = d < p ? cut_form(text.substr(0, p), d) : cut_form(text, d);
  std::string problem_text = p < d ? cut_form(text.substr(0, d), p) : cut_form(text, p);
  try {
    domains::Translation out;
    out.domain = pddl::parse_domain(domain_text);
    out.problem = pddl::parse_problem(problem_text, out.domain);
    auto kind = domains::detect_kind(out.domain);
    if (!kind) throw Error(ErrorCode::UnknownTaskKind, "domain '" + out.domain.name + "'");
    out.kind = *kind;
    return out;
  } catch (const Error& e) {
    throw Error(ErrorCode::TranslationFailed, e.what(), e.code());
  }
}

}  // namespace planloop::refine
