#pragma once

// The refinement loop: translate the question once, ask the planner for a
// plan, check it, feed the first error back, and re-plan until the check
// passes or the refinement budget runs out. Every exchange is recorded.

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "planloop/domains.hpp"
#include "planloop/llm.hpp"
#include "planloop/planners.hpp"
#include "planloop/validate.hpp"

namespace planloop::refine {

inline constexpr int kTranscriptSchemaVersion = 1;

enum class ValidatorKind { External, SelfLlm };
enum class TranslatorKind { Reference, Llm };

std::string_view to_string(ValidatorKind kind);
std::string_view to_string(TranslatorKind kind);
/// Throw ConfigError.
ValidatorKind parse_validator_kind(std::string_view name);
TranslatorKind parse_translator_kind(std::string_view name);

struct IsrConfig {
  /// 0 gives the single-shot baseline.
  int max_refinements = 10;
  ValidatorKind validator_kind = ValidatorKind::External;
  TranslatorKind translator_kind = TranslatorKind::Reference;
  std::string planner_kind = "oracle";
  bool keep_state_traces = false;
};

struct Backends {
  std::shared_ptr<planners::PlannerBackend> planner;
  /// Needed by the LLM translator and the self-validator.
  std::shared_ptr<const llm::Client> llm;
};

struct Exchange {
  std::vector<llm::ChatMessage> prompt;
  std::string response;
};

struct IterationRecord {
  std::size_t index = 0;
  std::optional<Exchange> planner;
  std::optional<Exchange> validator;
  world::Plan plan;
  validate::Verdict verdict;
  std::string feedback;
};

enum class FinalOutcome { Success, Failure };

struct Transcript {
  std::optional<domains::Instance> instance;
  std::string nl_text;
  IsrConfig config;
  std::string planner_name;
  std::string domain_text;
  std::string problem_text;
  std::optional<Exchange> translation;
  std::vector<IterationRecord> records;
  world::Plan final_plan;
  FinalOutcome outcome = FinalOutcome::Failure;
  std::string failure_reason;
  /// The final plan re-checked by the external validator against the
  /// ground-truth PDDL. Absent when no plan was produced.
  std::optional<bool> final_check;

  bool success() const { return outcome == FinalOutcome::Success; }
};

/// The external validator checks against the instance's own PDDL. Never
/// throws for model misbehaviour: translation and backend failures end the
/// transcript with outcome Failure and the reason recorded.
Transcript run_pipeline(const domains::Instance& instance, const IsrConfig& config,
                        const Backends& backends);
/// Same, from a bare question. The translated PDDL is the only ground truth.
Transcript run_pipeline(std::string_view nl_text, const IsrConfig& config,
                        const Backends& backends);

/// Parses a self-validator response. "Final answer:" followed by Yes/No sets
/// the outcome; on No, the last action named before the first "is wrong"
/// line becomes the failing step. Without a final answer the verdict is
/// Invalid with a generic explanation.
validate::Verdict parse_self_verdict(std::string_view response, const world::Model& model);

/// Asks the model to check the plan. `exchange` receives the prompt and
/// response when given.
validate::Verdict self_validate(const world::Model& model, const world::Plan& plan,
                                const llm::Client& client, Exchange* exchange = nullptr);

/// Parses "Domain file: ... Problem file: ..." output. Throws
/// TranslationFailed.
domains::Translation parse_translation(std::string_view response);

}  // namespace planloop::refine
