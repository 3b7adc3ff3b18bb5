#include "planloop/error.hpp"

namespace planloop {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnbalancedParens: return "UnbalancedParens";
    case ErrorCode::UnknownSection: return "UnknownSection";
    case ErrorCode::DuplicateAction: return "DuplicateAction";
    case ErrorCode::DuplicatePredicate: return "DuplicatePredicate";
    case ErrorCode::DuplicateParameter: return "DuplicateParameter";
    case ErrorCode::UndeclaredType: return "UndeclaredType";
    case ErrorCode::UndeclaredVariable: return "UndeclaredVariable";
    case ErrorCode::UnknownPredicate: return "UnknownPredicate";
    case ErrorCode::ArityError: return "ArityError";
    case ErrorCode::UndeclaredObject: return "UndeclaredObject";
    case ErrorCode::NonGroundAtom: return "NonGroundAtom";
    case ErrorCode::NegativeGoal: return "NegativeGoal";
    case ErrorCode::DomainMismatch: return "DomainMismatch";
    case ErrorCode::UnknownAction: return "UnknownAction";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::NotApplicable: return "NotApplicable";
    case ErrorCode::FeedbackOnValid: return "FeedbackOnValid";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::TemplateMismatch: return "TemplateMismatch";
    case ErrorCode::NotCookingDomain: return "NotCookingDomain";
    case ErrorCode::AlreadyEnriched: return "AlreadyEnriched";
    case ErrorCode::UnknownTaskKind: return "UnknownTaskKind";
    case ErrorCode::EmptyPlan: return "EmptyPlan";
    case ErrorCode::NoMutationPossible: return "NoMutationPossible";
    case ErrorCode::BackendFailure: return "BackendFailure";
    case ErrorCode::TranslationFailed: return "TranslationFailed";
    case ErrorCode::UnparseableVerdict: return "UnparseableVerdict";
    case ErrorCode::Transport: return "Transport";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::ReplayMiss: return "ReplayMiss";
    case ErrorCode::EmptyResponse: return "EmptyResponse";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::InconsistentGrid: return "InconsistentGrid";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace planloop
