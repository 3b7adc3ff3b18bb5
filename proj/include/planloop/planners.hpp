#pragma once

// Plan producers: response parsing for LLM planners, per-family oracle
// planners, breadth-first search, and the fault-injection and repair
// backends used to exercise the refinement loop without a model.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "planloop/llm.hpp"
#include "planloop/prompts.hpp"
#include "planloop/world.hpp"

namespace planloop::planners {

using prompts::PriorAttempt;

struct PlanRequest {
  world::Model model;
  /// The texts the model was built from; LLM backends put them in the prompt.
  std::string domain_text;
  std::string problem_text;
  std::optional<PriorAttempt> prior_attempt;
  std::optional<std::string> nl_text;
};

struct PlanResponse {
  world::Plan plan;
  /// Empty for backends that do not talk to a model.
  std::vector<llm::ChatMessage> prompt;
  std::string raw_response;
};

class PlannerBackend {
 public:
  virtual ~PlannerBackend() = default;
  virtual std::string name() const = 0;
  /// Throws Error(BackendFailure) with the underlying code as cause.
  virtual PlanResponse produce(const PlanRequest& request) = 0;
};

/// Inserts the missing argument when an action has one argument fewer than
/// its schema and exactly one parameter's type has a single object (the
/// robot in ball moving). Other actions pass through unchanged.
world::GroundAction adapt_arguments(const world::GroundAction& action, const world::Model& model);
world::Plan adapt_arguments(const world::Plan& plan, const world::Model& model);

/// Collects flat parenthesised expressions whose head is a declared action,
/// in order, and adapts their arguments. Throws ArityMismatch when an action
/// still has the wrong argument count and EmptyPlan when none is found.
world::Plan extract_plan(std::string_view response, const world::Model& model);

/// Per ingredient, ascending: pick, add to every pot still needing it,
/// putdown. Finishes a held ingredient first.
world::Plan oracle_cooking(const world::Model& model);
/// Clears everything above the correct bottom part of the goal tower onto
/// the table, then builds the rest of the tower bottom up. Throws
/// InvalidSpec unless the goal is a single tower over every block.
world::Plan oracle_blocksworld(const world::Model& model);
/// Serves an unsatisfied ball in the robot's room if there is one, else goes
/// to the first unsatisfied ball. Balls are taken in name order.
world::Plan oracle_ballmoving(const world::Model& model);
/// Dispatches on the domain name. Throws UnknownTaskKind.
world::Plan oracle_plan(const world::Model& model);

struct SearchResult {
  std::optional<world::Plan> plan;
  /// Why no plan was returned: "depth limit reached", "state limit reached"
  /// or "state space exhausted".
  std::string reason;
  std::size_t expanded = 0;
};

/// Breadth-first search with successors in ascending action order, so the
/// result is the lexicographically first among the shortest plans. Gives up
/// once `max_states` distinct states have been stored.
inline constexpr std::size_t kBfsMaxStates = 200000;
SearchResult bfs_plan(const world::Model& model, std::size_t max_depth,
                      std::size_t max_states = kBfsMaxStates);

struct Mutation {
  world::Plan plan;
  /// 1-based.
  std::size_t injected_step = 0;
};

/// Replaces one step with a type-correct action that is not applicable at
/// that point. The step is uniform among steps that admit such an action,
/// and the action uniform among them. Throws NotApplicable if the plan does
/// not execute and NoMutationPossible if no step qualifies.
Mutation mutate_plan(const world::Plan& plan, const world::Model& model, std::uint64_t seed);

using OracleFn = std::function<world::Plan(const world::Model&)>;

/// The failing step of a refinement request: the prior attempt's recorded
/// step, else the first "at step N" in its feedback, else 1.
std::size_t failing_step_of(const PriorAttempt& prior);

/// Always the oracle plan, prior attempts or not.
std::shared_ptr<PlannerBackend> oracle_backend(OracleFn oracle = oracle_plan);
/// The oracle plan on first requests. On refinements, keeps the prior plan's
/// steps before the failing one and appends the oracle plan from the state
/// they reach.
std::shared_ptr<PlannerBackend> repair_backend(OracleFn oracle = oracle_plan);
/// First request: the oracle plan with one step mutated using `seed`.
/// Refinements: as repair_backend.
std::shared_ptr<PlannerBackend> fault_backend(std::uint64_t seed, OracleFn oracle = oracle_plan);
std::shared_ptr<PlannerBackend> bfs_backend(std::size_t max_depth);
/// build_planner_prompt, complete, extract_plan.
std::shared_ptr<PlannerBackend> llm_backend(std::shared_ptr<const llm::Client> client);

/// "oracle", "repair", "fault", "bfs" or "llm". Throws ConfigError for other
/// names, or for "llm" without a client.
std::shared_ptr<PlannerBackend> make_backend(std::string_view name, std::uint64_t seed,
                                             std::shared_ptr<const llm::Client> client);

}  // namespace planloop::planners
