#pragma once

// Few-shot prompt assembly for the three LLM roles: translator (question to
// PDDL), planner (PDDL to action sequence) and self-validator (plan check).
// Example blocks are the verbatim appendix texts from the corpus.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "planloop/domains.hpp"
#include "planloop/llm.hpp"
#include "planloop/world.hpp"

namespace planloop::prompts {

enum class Role { Translator, Planner, Validator };

struct Example {
  std::string name;
  std::string question;
  std::string answer;
};

struct PromptBundle {
  std::string preamble;
  std::vector<Example> examples;
  std::string question;

  /// System preamble, one user/assistant pair per example, then the live
  /// question as the final user message.
  std::vector<llm::ChatMessage> messages() const;
};

/// The corpus examples for a role and family, in appendix order.
std::vector<Example> examples(Role role, domains::TaskKind kind);

struct PriorAttempt {
  world::Plan plan;
  std::string feedback;
  std::optional<std::size_t> failing_step;
};

/// The live block reads "Domain file:\n\n<domain>\n\nProblem file:\n\n<problem>"
/// like the examples, followed by the previous plan and its feedback on
/// refinement rounds. Throws UnknownTaskKind when the domain is none of the
/// three families.
PromptBundle build_planner_prompt(std::string_view domain_text, std::string_view problem_text,
                                  const std::optional<PriorAttempt>& prior = std::nullopt);

/// Throws UnknownTaskKind when the question matches no family.
PromptBundle build_translator_prompt(std::string_view nl_text);

/// Shows the initial state the way the examples do (ball moving: robot-at
/// and at atoms; blocksworld: on and on-table atoms; cooking: all atoms),
/// then the goal and the examined action sequence.
PromptBundle build_validator_prompt(const world::Model& model, const world::Plan& plan);

}  // namespace planloop::prompts
