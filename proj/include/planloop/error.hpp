#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace planloop {

enum class ErrorCode {
  // pddl
  SyntaxError,
  UnbalancedParens,
  UnknownSection,
  DuplicateAction,
  DuplicatePredicate,
  DuplicateParameter,
  UndeclaredType,
  UndeclaredVariable,
  UnknownPredicate,
  ArityError,
  UndeclaredObject,
  NonGroundAtom,
  NegativeGoal,
  DomainMismatch,
  // world
  UnknownAction,
  ArityMismatch,
  TypeMismatch,
  NotApplicable,
  // validate
  FeedbackOnValid,
  // domains
  InvalidSpec,
  TemplateMismatch,
  NotCookingDomain,
  AlreadyEnriched,
  // planners
  UnknownTaskKind,
  EmptyPlan,
  NoMutationPossible,
  BackendFailure,
  // isr
  TranslationFailed,
  UnparseableVerdict,
  // llm
  Transport,
  RateLimited,
  ReplayMiss,
  EmptyResponse,
  // harness
  ConfigError,
  InconsistentGrid,
  Io,
};

std::string_view to_string(ErrorCode code);

/// The single exception type thrown by the library. `cause` carries the
/// underlying code when an error wraps another (BackendFailure around a
/// transport failure, for instance).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<ErrorCode> cause = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        cause_(cause),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<ErrorCode> cause() const noexcept { return cause_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::optional<ErrorCode> cause_;
  std::string detail_;
};

}  // namespace planloop
