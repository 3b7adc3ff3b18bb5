#pragma once

// The external validator: simulates a plan from the initial state, stops at
// the first error and renders feedback text for the refinement loop.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "planloop/world.hpp"

namespace planloop::validate {

/// Bumped whenever the wording produced by render_feedback changes.
inline constexpr int kFeedbackTemplateVersion = 1;

enum class Outcome { Valid, Invalid };

struct UnknownAction {
  world::GroundAction action;
};

struct ArityMismatch {
  world::GroundAction action;
  std::size_t expected = 0;
  std::size_t got = 0;
};

struct TypeMismatch {
  world::GroundAction action;
  std::string detail;
};

struct PreconditionUnsatisfied {
  world::GroundAction action;
  std::vector<world::GroundLiteral> unmet;
};

struct DomainRuleViolated {
  world::GroundAction action;
  std::string rule;
  std::string detail;
};

struct GoalUnsatisfied {
  std::vector<world::GroundAtom> unmet;
};

/// Produced by an LLM self-validator, which may or may not name an action.
struct SelfReported {
  std::optional<world::GroundAction> action;
  std::string explanation;
};

using FailureReason = std::variant<UnknownAction, ArityMismatch, TypeMismatch,
                                   PreconditionUnsatisfied, DomainRuleViolated,
                                   GoalUnsatisfied, SelfReported>;

/// "UnknownAction", "PreconditionUnsatisfied", ...
std::string_view reason_kind(const FailureReason& reason);

/// The action a reason blames, if any.
std::optional<world::GroundAction> blamed_action(const FailureReason& reason);

/// The violated literals, unmet goal atoms or rule detail as strings.
std::vector<std::string> reason_literals(const FailureReason& reason);

struct Verdict {
  Outcome outcome = Outcome::Valid;
  /// 1-based. A goal failure is reported at plan length + 1.
  std::optional<std::size_t> failing_step;
  std::optional<FailureReason> reason;
  /// The state after each successful step, when requested.
  std::vector<world::State> state_trace;

  bool valid() const { return outcome == Outcome::Valid; }
};

/// Checked after an action proved applicable. Returns a violation detail, or
/// nothing when the step is fine. `history` holds the steps before `action`.
struct DomainRule {
  std::string name;
  std::function<std::optional<std::string>(std::span<const world::GroundAction> history,
                                           const world::GroundAction& action,
                                           const world::State& state)>
      check;
};

/// Fails on the second pick of the same ingredient.
DomainRule pick_once_rule();

/// Rules implied by the model's domain: pick-once for "cooking", none else.
std::vector<DomainRule> default_rules(const world::Model& model);

struct ValidateOptions {
  bool keep_state_trace = false;
};

Verdict validate_plan(const world::Model& model, const world::Plan& plan,
                      const std::vector<DomainRule>& rules, ValidateOptions options = {});

/// Throws FeedbackOnValid for a Valid verdict.
std::string render_feedback(const Verdict& verdict, const world::Model& model);

}  // namespace planloop::validate
