#include "planloop/prompts.hpp"

#include <algorithm>

#include "planloop/corpus.hpp"
#include "planloop/error.hpp"

namespace planloop::prompts {

namespace {

constexpr std::string_view kTranslatorPreamble =
    "You translate a natural language task description into PDDL. Answer with a domain file "
    "and a problem file, introduced by \"Domain file:\" and \"Problem file:\", in the same "
    "format as the examples.";

constexpr std::string_view kPlannerPreamble =
    "You are a task planner. Given a PDDL domain file and problem file, produce an action "
    "sequence that reaches the goal from the initial state. Reason step by step as in the "
    "examples and write every action as a PDDL expression such as (pick ingredient1).";

constexpr std::string_view kValidatorPreamble =
    "You check whether an action sequence accomplishes a goal. Analyse the actions one by one "
    "from the initial state as in the examples, stop at the first wrong action, and finish with "
    "a line \"Final answer:\" followed by Yes or No.";

std::string_view role_dir(Role role) {
  switch (role) {
    case Role::Translator: return "translator";
    case Role::Planner: return "planner";
    case Role::Validator: return "validator";
  }
  return "";
}

std::string trim(std::string_view text) {
  std::size_t b = text.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  std::size_t e = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(b, e - b + 1));
}

domains::TaskKind kind_of_domain_text(std::string_view domain_text) {
  pddl::DomainDef domain;
  try {
    domain = pddl::parse_domain(domain_text);
  } catch (const Error& e) {
    throw Error(ErrorCode::UnknownTaskKind, "domain does not parse: " + std::string(e.what()));
  }
  if (auto kind = domains::detect_kind(domain)) return *kind;
  throw Error(ErrorCode::UnknownTaskKind, "no prompt corpus for domain '" + domain.name + "'");
}

std::string atom_lines(const std::vector<world::GroundAtom>& atoms) {
  std::string out;
  for (const auto& a : atoms) out += world::to_string(a) + "\n";
  return out;
}

}  // namespace

std::vector<llm::ChatMessage> PromptBundle::messages() const {
  std::vector<llm::ChatMessage> out;
  out.push_back({llm::Role::System, preamble});
  for (const Example& e : examples) {
    out.push_back({llm::Role::User, e.question});
    out.push_back({llm::Role::Assistant, e.answer});
  }
  out.push_back({llm::Role::User, question});
  return out;
}

std::vector<Example> examples(Role role, domains::TaskKind kind) {
  std::vector<Example> out;
  std::string prefix = "prompts/" + std::string(role_dir(role)) + "/" +
                       std::string(domains::to_string(kind)) + "/example";
  for (int k = 1;; ++k) {
    auto question = corpus::find(prefix + std::to_string(k) + ".question.txt");
    auto answer = corpus::find(prefix + std::to_string(k) + ".answer.txt");
    if (!question || !answer) break;
    out.push_back(Example{"example" + std::to_string(k), trim(*question), trim(*answer)});
  }
  return out;
}

PromptBundle build_planner_prompt(std::string_view domain_text, std::string_view problem_text,
                                  const std::optional<PriorAttempt>& prior) {
  domains::TaskKind kind = kind_of_domain_text(domain_text);
  PromptBundle bundle;
  bundle.preamble = std::string(kPlannerPreamble);
  bundle.examples = examples(Role::Planner, kind);
  bundle.question = "Domain file:\n\n" + trim(domain_text) + "\n\nProblem file:\n\n" + trim(problem_text);
  if (prior) {
    bundle.question += "\n\nYour previous action sequence was:\n\n" + world::format_plan(prior->plan) +
                       "\nFeedback from the validator:\n\n" + prior->feedback +
                       "\n\nPlease generate a corrected, complete action sequence from the initial "
                       "state.";
  }
  return bundle;
}

PromptBundle build_translator_prompt(std::string_view nl_text) {
  auto kind = domains::detect_question_kind(nl_text);
  if (!kind) throw Error(ErrorCode::UnknownTaskKind, "question matches no task family");
  PromptBundle bundle;
  bundle.preamble = std::string(kTranslatorPreamble);
  bundle.examples = examples(Role::Translator, *kind);
  bundle.question = trim(nl_text);
  return bundle;
}

PromptBundle build_validator_prompt(const world::Model& model, const world::Plan& plan) {
  auto kind = domains::detect_kind(model.domain);
  if (!kind) throw Error(ErrorCode::UnknownTaskKind, "no prompt corpus for domain '" + model.domain.name + "'");
  std::vector<world::GroundAtom> init(model.init.atoms.begin(), model.init.atoms.end());
  std::string header = "Initial state:";
  auto keep_only = [&](std::initializer_list<std::string_view> predicates) {
    std::vector<world::GroundAtom> kept;
    for (std::string_view p : predicates) {
      for (const auto& a : init) {
        if (a.predicate == p) kept.push_back(a);
      }
    }
    init = std::move(kept);
  };
  if (*kind == domains::TaskKind::BallMoving) {
    header = "Robot and ball initial state:";
    keep_only({"robot-at", "at"});
  } else if (*kind == domains::TaskKind::Blocksworld) {
    header = "Block initial state:";
    keep_only({"on-table", "on"});
    std::stable_sort(init.begin(), init.end(), [](const auto& a, const auto& b) {
      return a.args.front() < b.args.front();
    });
  }
  PromptBundle bundle;
  bundle.preamble = std::string(kValidatorPreamble);
  bundle.examples = examples(Role::Validator, *kind);
  bundle.question = header + "\n\n" + atom_lines(init) + "Goal state:\n\n" + atom_lines(model.goal) +
                    "Examined action sequence:\n\n" + trim(world::format_plan(plan));
  return bundle;
}

}  // namespace planloop::prompts
