#include "planloop/validate.hpp"

#include <algorithm>

#include "planloop/error.hpp"

namespace planloop::validate {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

std::string arguments(std::size_t count) {
  return std::to_string(count) + (count == 1 ? " argument" : " arguments");
}

Verdict invalid(std::size_t step, FailureReason reason) {
  Verdict v;
  v.outcome = Outcome::Invalid;
  v.failing_step = step;
  v.reason = std::move(reason);
  return v;
}

}  // namespace

std::string_view reason_kind(const FailureReason& reason) {
  return std::visit(Overloaded{
                        [](const UnknownAction&) { return std::string_view("UnknownAction"); },
                        [](const ArityMismatch&) { return std::string_view("ArityMismatch"); },
                        [](const TypeMismatch&) { return std::string_view("TypeMismatch"); },
                        [](const PreconditionUnsatisfied&) {
                          return std::string_view("PreconditionUnsatisfied");
                        },
                        [](const DomainRuleViolated&) {
                          return std::string_view("DomainRuleViolated");
                        },
                        [](const GoalUnsatisfied&) { return std::string_view("GoalUnsatisfied"); },
                        [](const SelfReported&) { return std::string_view("SelfReported"); },
                    },
                    reason);
}

std::optional<world::GroundAction> blamed_action(const FailureReason& reason) {
  return std::visit(Overloaded{
                        [](const GoalUnsatisfied&) -> std::optional<world::GroundAction> {
                          return std::nullopt;
                        },
                        [](const SelfReported& r) { return r.action; },
                        [](const auto& r) -> std::optional<world::GroundAction> {
                          return r.action;
                        },
                    },
                    reason);
}

std::vector<std::string> reason_literals(const FailureReason& reason) {
  return std::visit(Overloaded{
                        [](const PreconditionUnsatisfied& r) {
                          std::vector<std::string> out;
                          for (const auto& l : r.unmet) out.push_back(world::to_string(l));
                          return out;
                        },
                        [](const GoalUnsatisfied& r) {
                          std::vector<std::string> out;
                          for (const auto& a : r.unmet) out.push_back(world::to_string(a));
                          return out;
                        },
                        [](const DomainRuleViolated& r) { return std::vector<std::string>{r.detail}; },
                        [](const TypeMismatch& r) { return std::vector<std::string>{r.detail}; },
                        [](const auto&) { return std::vector<std::string>{}; },
                    },
                    reason);
}

DomainRule pick_once_rule() {
  return DomainRule{
      "pick-once",
      [](std::span<const world::GroundAction> history, const world::GroundAction& action,
         const world::State&) -> std::optional<std::string> {
        if (action.name != "pick") return std::nullopt;
        bool again = std::any_of(history.begin(), history.end(), [&](const auto& earlier) {
          return earlier.name == "pick" && earlier.args == action.args;
        });
        if (!again) return std::nullopt;
        std::string what = action.args.empty() ? std::string("the ingredient") : action.args.back();
        return what + " has already been picked";
      }};
}

std::vector<DomainRule> default_rules(const world::Model& model) {
  if (model.domain.name == "cooking") return {pick_once_rule()};
  return {};
}

Verdict validate_plan(const world::Model& model, const world::Plan& plan,
                      const std::vector<DomainRule>& rules, ValidateOptions options) {
  world::State state = model.init;
  std::vector<world::State> trace;
  auto fail_at = [&](std::size_t step, FailureReason reason) {
    Verdict v = invalid(step, std::move(reason));
    v.state_trace = std::move(trace);
    return v;
  };
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const world::GroundAction& action = plan[i];
    const std::size_t step = i + 1;
    const pddl::ActionSchema* schema = model.domain.find_action(action.name);
    if (schema == nullptr) return fail_at(step, UnknownAction{action});
    if (schema->params.size() != action.args.size()) {
      return fail_at(step, ArityMismatch{action, schema->params.size(), action.args.size()});
    }
    world::Applicability check;
    try {
      check = world::applicable(state, action, model);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TypeMismatch) throw;
      return fail_at(step, TypeMismatch{action, e.detail()});
    }
    if (!check.satisfied) return fail_at(step, PreconditionUnsatisfied{action, check.unmet});
    std::span<const world::GroundAction> history(plan.data(), i);
    for (const DomainRule& rule : rules) {
      if (auto detail = rule.check(history, action, state)) {
        return fail_at(step, DomainRuleViolated{action, rule.name, *detail});
      }
    }
    state = world::apply(state, action, model);
    if (options.keep_state_trace) trace.push_back(state);
  }
  world::GoalCheck goal = world::holds(state, model.goal);
  if (!goal.satisfied) return fail_at(plan.size() + 1, GoalUnsatisfied{goal.unmet});
  Verdict v;
  v.state_trace = std::move(trace);
  return v;
}

std::string render_feedback(const Verdict& verdict, const world::Model& model) {
  if (verdict.valid() || !verdict.reason) {
    throw Error(ErrorCode::FeedbackOnValid, "a valid plan has no feedback");
  }
  const std::string step = verdict.failing_step ? std::to_string(*verdict.failing_step) : "?";
  auto opening = [&](const world::GroundAction& action) {
    return "The action " + world::to_string(action) + " at step " + step + " is incorrect ";
  };
  return std::visit(
      Overloaded{
          [&](const UnknownAction& r) {
            return opening(r.action) + "because " + r.action.name +
                   " is not an action of the " + model.domain.name + " domain.";
          },
          [&](const ArityMismatch& r) {
            return opening(r.action) + "because " + r.action.name + " takes " +
                   arguments(r.expected) + " but " + std::to_string(r.got) +
                   (r.got == 1 ? " was" : " were") + " given.";
          },
          [&](const TypeMismatch& r) { return opening(r.action) + "because " + r.detail + "."; },
          [&](const PreconditionUnsatisfied& r) {
            std::vector<std::string> lits;
            for (const auto& l : r.unmet) lits.push_back(world::to_string(l));
            bool one = lits.size() == 1;
            return opening(r.action) + "because " + (one ? "precondition " : "preconditions ") +
                   join(lits) + (one ? " is" : " are") + " not satisfied.";
          },
          [&](const DomainRuleViolated& r) {
            return opening(r.action) + "because " + r.detail + ".";
          },
          [&](const GoalUnsatisfied& r) {
            std::vector<std::string> atoms;
            for (const auto& a : r.unmet) atoms.push_back(world::to_string(a));
            return std::string("The action sequence is complete but the goal is not accomplished "
                               "because ") +
                   join(atoms) + (atoms.size() == 1 ? " is" : " are") +
                   " not satisfied in the final state.";
          },
          [&](const SelfReported& r) {
            if (r.action) return opening(*r.action) + "according to the plan check.";
            return std::string("The action sequence is wrong, it cannot accomplish the goal.");
          },
      },
      *verdict.reason);
}

}  // namespace planloop::validate
