#include "planloop/planners.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>
#include <regex>

#include "planloop/domains.hpp"
#include "planloop/error.hpp"

namespace planloop::planners {

namespace {

using world::GroundAction;
using world::GroundAtom;
using world::Model;
using world::Plan;
using world::State;

// "ball2" < "ball10": compares the alphabetic stem, then the numeric suffix.
bool natural_less(const std::string& a, const std::string& b) {
  auto split = [](const std::string& s) {
    std::size_t i = s.size();
    while (i > 0 && std::isdigit(static_cast<unsigned char>(s[i - 1]))) --i;
    std::string digits = s.substr(i);
    digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size()));
    return std::make_tuple(s.substr(0, i), digits.size(), digits);
  };
  auto ka = split(a), kb = split(b);
  if (ka != kb) return ka < kb;
  return a < b;
}

void sort_natural(std::vector<std::string>& names) {
  std::sort(names.begin(), names.end(), natural_less);
}

// Appends an action and advances the state; a failure here is a bug in the
// oracle, so it surfaces as the apply error.
void step(Plan& plan, State& state, const Model& model, GroundAction action) {
  state = world::apply(state, action, model);
  plan.push_back(std::move(action));
}

Model with_init(const Model& model, State init) {
  Model out = model;
  out.init = std::move(init);
  return out;
}

std::string only_object_of_type(const Model& model, std::string_view type) {
  std::vector<std::string> objects = model.objects_of_type(type);
  if (objects.size() != 1) {
    throw Error(ErrorCode::InvalidSpec,
                "expected exactly one " + std::string(type) + ", found " + std::to_string(objects.size()));
  }
  return objects.front();
}

[[noreturn]] void backend_failure(const std::string& backend, const Error& cause) {
  throw Error(ErrorCode::BackendFailure, backend + ": " + cause.what(), cause.code());
}

class OracleBackend : public PlannerBackend {
 public:
  explicit OracleBackend(OracleFn oracle) : oracle_(std::move(oracle)) {}
  std::string name() const override { return "oracle"; }
  PlanResponse produce(const PlanRequest& request) override {
    try {
      return PlanResponse{oracle_(request.model), {}, {}};
    } catch (const Error& e) {
      backend_failure(name(), e);
    }
  }

 private:
  OracleFn oracle_;
};

Plan repair(const PlanRequest& request, const OracleFn& oracle) {
  const PriorAttempt& prior = *request.prior_attempt;
  std::size_t keep = std::min(failing_step_of(prior) - 1, prior.plan.size());
  Plan plan;
  State state = request.model.init;
  for (std::size_t i = 0; i < keep; ++i) {
    try {
      if (!world::applicable(state, prior.plan[i], request.model).satisfied) break;
    } catch (const Error&) {
      break;
    }
    step(plan, state, request.model, prior.plan[i]);
  }
  Plan rest = oracle(with_init(request.model, state));
  plan.insert(plan.end(), rest.begin(), rest.end());
  return plan;
}

class RepairBackend : public PlannerBackend {
 public:
  explicit RepairBackend(OracleFn oracle) : oracle_(std::move(oracle)) {}
  std::string name() const override { return "repair"; }
  PlanResponse produce(const PlanRequest& request) override {
    try {
      if (!request.prior_attempt) return PlanResponse{oracle_(request.model), {}, {}};
      return PlanResponse{repair(request, oracle_), {}, {}};
    } catch (const Error& e) {
      backend_failure(name(), e);
    }
  }

 private:
  OracleFn oracle_;
};

class FaultBackend : public PlannerBackend {
 public:
  FaultBackend(std::uint64_t seed, OracleFn oracle) : seed_(seed), oracle_(std::move(oracle)) {}
  std::string name() const override { return "fault"; }
  PlanResponse produce(const PlanRequest& request) override {
    try {
      if (request.prior_attempt) return PlanResponse{repair(request, oracle_), {}, {}};
      Plan plan = oracle_(request.model);
      try {
        plan = mutate_plan(plan, request.model, seed_).plan;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoMutationPossible) throw;
      }
      return PlanResponse{std::move(plan), {}, {}};
    } catch (const Error& e) {
      backend_failure(name(), e);
    }
  }

 private:
  std::uint64_t seed_;
  OracleFn oracle_;
};

class BfsBackend : public PlannerBackend {
 public:
  explicit BfsBackend(std::size_t max_depth) : max_depth_(max_depth) {}
  std::string name() const override { return "bfs"; }
  PlanResponse produce(const PlanRequest& request) override {
    try {
      // The pick-once rule lives outside the PDDL, so search the enriched model.
      Model model = request.model.domain.name == "cooking" ? domains::enrich_cooking(request.model)
                                                          : request.model;
      SearchResult result = bfs_plan(model, max_depth_);
      if (!result.plan) {
        throw Error(ErrorCode::BackendFailure, "bfs: no plan (" + result.reason + ")");
      }
      return PlanResponse{std::move(*result.plan), {}, {}};
    } catch (const Error& e) {
      if (e.code() == ErrorCode::BackendFailure) throw;
      backend_failure(name(), e);
    }
  }

 private:
  std::size_t max_depth_;
};

class LlmBackend : public PlannerBackend {
 public:
  explicit LlmBackend(std::shared_ptr<const llm::Client> client) : client_(std::move(client)) {}
  std::string name() const override { return "llm"; }
  PlanResponse produce(const PlanRequest& request) override {
    PlanResponse out;
    try {
      prompts::PromptBundle bundle =
          prompts::build_planner_prompt(request.domain_text, request.problem_text, request.prior_attempt);
      out.prompt = bundle.messages();
      out.raw_response = client_->complete(out.prompt);
      out.plan = extract_plan(out.raw_response, request.model);
    } catch (const Error& e) {
      backend_failure(name(), e);
    }
    return out;
  }

 private:
  std::shared_ptr<const llm::Client> client_;
};

}  // namespace

GroundAction adapt_arguments(const GroundAction& action, const Model& model) {
  const pddl::ActionSchema* schema = model.domain.find_action(action.name);
  if (schema == nullptr || action.args.size() + 1 != schema->params.size()) return action;
  std::optional<std::size_t> slot;
  for (std::size_t i = 0; i < schema->params.size(); ++i) {
    const std::string& type = schema->params[i].type;
    if (type == pddl::kObjectType || model.objects_of_type(type).size() != 1) continue;
    if (slot) return action;
    slot = i;
  }
  if (!slot) return action;
  GroundAction out = action;
  out.args.insert(out.args.begin() + static_cast<std::ptrdiff_t>(*slot),
                  model.objects_of_type(schema->params[*slot].type).front());
  return out;
}

Plan adapt_arguments(const Plan& plan, const Model& model) {
  Plan out;
  out.reserve(plan.size());
  for (const GroundAction& a : plan) out.push_back(adapt_arguments(a, model));
  return out;
}

Plan extract_plan(std::string_view response, const Model& model) {
  Plan plan;
  std::size_t pos = 0;
  while ((pos = response.find('(', pos)) != std::string_view::npos) {
    std::size_t close = response.find_first_of("()", pos + 1);
    if (close == std::string_view::npos) break;
    if (response[close] == '(') {  // nested: only flat expressions count
      pos = close;
      continue;
    }
    std::string_view expr = response.substr(pos, close - pos + 1);
    pos = close + 1;
    GroundAction action;
    try {
      action = world::parse_action(expr);
    } catch (const Error&) {
      continue;
    }
    const pddl::ActionSchema* schema = model.domain.find_action(action.name);
    if (schema == nullptr) continue;
    action = adapt_arguments(action, model);
    if (action.args.size() != schema->params.size()) {
      throw Error(ErrorCode::ArityMismatch, world::to_string(action) + ": " + schema->name +
                                                " expects " + std::to_string(schema->params.size()) +
                                                " argument(s)");
    }
    plan.push_back(std::move(action));
  }
  // "(pick)" never reaches the loop body above as an action with arguments,
  // but it is still a malformed action rather than prose.
  if (plan.empty()) {
    static const std::regex bare(R"(\(\s*([A-Za-z][A-Za-z0-9_-]*)\s*\))");
    std::string text(response);
    for (std::sregex_iterator it(text.begin(), text.end(), bare), end; it != end; ++it) {
      std::string head = (*it)[1].str();
      std::transform(head.begin(), head.end(), head.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      const pddl::ActionSchema* schema = model.domain.find_action(head);
      if (schema != nullptr && !schema->params.empty()) {
        throw Error(ErrorCode::ArityMismatch, "(" + head + "): " + head + " expects " +
                                                  std::to_string(schema->params.size()) + " argument(s)");
      }
    }
    throw Error(ErrorCode::EmptyPlan, "no action expressions in response");
  }
  return plan;
}

Plan oracle_cooking(const Model& model) {
  State state = model.init;
  std::map<std::string, std::vector<std::string>> needs;  // ingredient -> pots
  for (const GroundAtom& g : model.goal) {
    if (g.predicate == "contain" && g.args.size() == 2 && !state.contains(g)) {
      needs[g.args[1]].push_back(g.args[0]);
    }
  }
  std::vector<std::string> ingredients;
  for (auto& [ingredient, pots] : needs) {
    sort_natural(pots);
    ingredients.push_back(ingredient);
  }
  sort_natural(ingredients);

  Plan plan;
  auto serve = [&](const std::string& ingredient) {
    for (const std::string& pot : needs[ingredient]) {
      step(plan, state, model, GroundAction{"add", {ingredient, pot}});
    }
    step(plan, state, model, GroundAction{"putdown", {ingredient}});
    needs.erase(ingredient);
  };
  for (const GroundAtom& g : model.init.atoms) {
    if (g.predicate == "holding" && g.args.size() == 1) {
      serve(g.args[0]);
      break;
    }
  }
  for (const std::string& ingredient : ingredients) {
    if (!needs.contains(ingredient)) continue;
    step(plan, state, model, GroundAction{"pick", {ingredient}});
    serve(ingredient);
  }
  return plan;
}

Plan oracle_blocksworld(const Model& model) {
  // Goal tower, bottom to top.
  std::vector<std::string> tower;
  std::map<std::string, std::string> goal_above;  // block -> block on it
  std::size_t goal_on = 0;
  for (const GroundAtom& g : model.goal) {
    if (g.predicate == "on-table" && g.args.size() == 1) {
      if (!tower.empty()) throw Error(ErrorCode::InvalidSpec, "goal has more than one tower");
      tower.push_back(g.args[0]);
    } else if (g.predicate == "on" && g.args.size() == 2) {
      if (!goal_above.emplace(g.args[1], g.args[0]).second) {
        throw Error(ErrorCode::InvalidSpec, "goal stacks two blocks on " + g.args[1]);
      }
      ++goal_on;
    } else {
      throw Error(ErrorCode::InvalidSpec, "goal atom " + world::to_string(g) + " is not part of a tower");
    }
  }
  if (tower.empty()) throw Error(ErrorCode::InvalidSpec, "goal tower has no bottom block");
  for (auto it = goal_above.find(tower.back()); it != goal_above.end(); it = goal_above.find(tower.back())) {
    if (tower.size() > goal_on + 1) break;
    tower.push_back(it->second);
  }
  if (tower.size() != goal_on + 1) throw Error(ErrorCode::InvalidSpec, "goal is not a single tower");

  State state = model.init;
  Plan plan;
  for (const GroundAtom& g : model.init.atoms) {
    if (g.predicate == "holding" && g.args.size() == 1) {
      step(plan, state, model, GroundAction{"putdown", {g.args[0]}});
      break;
    }
  }

  std::size_t prefix = 0;
  while (prefix < tower.size() &&
         state.contains(prefix == 0 ? GroundAtom{"on-table", {tower[0]}}
                                    : GroundAtom{"on", {tower[prefix], tower[prefix - 1]}})) {
    ++prefix;
  }
  auto in_prefix = [&](const std::string& b) {
    return std::find(tower.begin(), tower.begin() + static_cast<std::ptrdiff_t>(prefix), b) !=
           tower.begin() + static_cast<std::ptrdiff_t>(prefix);
  };

  for (;;) {
    std::vector<std::pair<std::string, std::string>> movable;  // block, block below
    for (const GroundAtom& g : state.atoms) {
      if (g.predicate == "on" && g.args.size() == 2 && state.contains(GroundAtom{"clear", {g.args[0]}}) &&
          !in_prefix(g.args[0])) {
        movable.emplace_back(g.args[0], g.args[1]);
      }
    }
    if (movable.empty()) break;
    auto first = std::min_element(movable.begin(), movable.end(), [](const auto& a, const auto& b) {
      return natural_less(a.first, b.first);
    });
    std::string top = first->first, below = first->second;
    step(plan, state, model, GroundAction{"unstack", {top, below}});
    step(plan, state, model, GroundAction{"putdown", {top}});
  }

  for (std::size_t j = std::max<std::size_t>(prefix, 1); j < tower.size(); ++j) {
    step(plan, state, model, GroundAction{"pickup", {tower[j]}});
    step(plan, state, model, GroundAction{"stack", {tower[j], tower[j - 1]}});
  }
  return plan;
}

Plan oracle_ballmoving(const Model& model) {
  const std::string robot = only_object_of_type(model, "robot");
  State state = model.init;
  std::string robot_room;
  std::map<std::string, std::string> ball_room;
  std::optional<std::string> carried;
  for (const GroundAtom& g : state.atoms) {
    if (g.predicate == "robot-at" && g.args.size() == 2 && g.args[0] == robot) robot_room = g.args[1];
    if (g.predicate == "at" && g.args.size() == 2) ball_room[g.args[0]] = g.args[1];
    if (g.predicate == "carry" && g.args.size() == 2 && g.args[0] == robot) carried = g.args[1];
  }
  if (robot_room.empty()) throw Error(ErrorCode::InvalidSpec, robot + " is in no room");
  std::map<std::string, std::string> goal_room;
  for (const GroundAtom& g : model.goal) {
    if (g.predicate == "at" && g.args.size() == 2) goal_room[g.args[0]] = g.args[1];
  }
  std::vector<std::string> balls;
  for (const auto& entry : goal_room) balls.push_back(entry.first);
  sort_natural(balls);

  Plan plan;
  auto move_to = [&](const std::string& room) {
    if (room == robot_room) return;
    step(plan, state, model, GroundAction{"move", {robot, robot_room, room}});
    robot_room = room;
  };
  auto deliver = [&](const std::string& ball) {
    auto goal = goal_room.find(ball);
    if (goal != goal_room.end()) move_to(goal->second);
    step(plan, state, model, GroundAction{"drop", {robot, ball, robot_room}});
    ball_room[ball] = robot_room;
  };
  if (carried) deliver(*carried);

  for (;;) {
    std::vector<std::string> pending;
    for (const std::string& b : balls) {
      if (ball_room[b] != goal_room[b]) pending.push_back(b);
    }
    if (pending.empty()) break;
    auto here = std::find_if(pending.begin(), pending.end(),
                             [&](const std::string& b) { return ball_room[b] == robot_room; });
    std::string ball = here != pending.end() ? *here : pending.front();
    move_to(ball_room[ball]);
    step(plan, state, model, GroundAction{"pick", {robot, ball, robot_room}});
    deliver(ball);
  }
  return plan;
}

Plan oracle_plan(const Model& model) {
  auto kind = domains::detect_kind(model.domain);
  if (!kind) throw Error(ErrorCode::UnknownTaskKind, "no oracle for domain '" + model.domain.name + "'");
  switch (*kind) {
    case domains::TaskKind::Cooking: return oracle_cooking(model);
    case domains::TaskKind::Blocksworld: return oracle_blocksworld(model);
    case domains::TaskKind::BallMoving: return oracle_ballmoving(model);
  }
  return {};
}

SearchResult bfs_plan(const Model& model, std::size_t max_depth, std::size_t max_states) {
  struct Grounded {
    GroundAction action;
    world::Binding binding;
  };
  std::vector<Grounded> actions;
  for (GroundAction& a : world::ground_actions(model)) {
    world::Binding b = world::bind(a, model);
    actions.push_back(Grounded{std::move(a), std::move(b)});
  }

  // States live once, as map keys; nodes point at them.
  struct Node {
    const State* state;
    std::size_t parent;
    std::size_t action;
    std::size_t depth;
  };
  std::vector<Node> nodes;
  std::map<State, std::size_t> seen;
  auto trace = [&](std::size_t index) {
    Plan plan;
    for (std::size_t i = index; i != 0; i = nodes[i].parent) plan.push_back(actions[nodes[i].action].action);
    std::reverse(plan.begin(), plan.end());
    return plan;
  };

  SearchResult result;
  nodes.push_back(Node{&seen.emplace(model.init, 0).first->first, 0, 0, 0});
  if (world::holds(model.init, model.goal).satisfied) {
    result.plan = Plan{};
    return result;
  }
  bool cut = false;
  for (std::size_t head = 0; head < nodes.size(); ++head) {
    if (nodes[head].depth >= max_depth) {
      cut = true;
      continue;
    }
    ++result.expanded;
    for (std::size_t a = 0; a < actions.size(); ++a) {
      const world::Binding& b = actions[a].binding;
      const State& current = *nodes[head].state;
      bool ok = std::all_of(b.precondition.begin(), b.precondition.end(), [&](const auto& lit) {
        return current.contains(lit.atom) != lit.negated;
      });
      if (!ok) continue;
      State next = current;
      for (const GroundAtom& g : b.del) next.atoms.erase(g);
      for (const GroundAtom& g : b.add) next.atoms.insert(g);
      if (seen.contains(next)) continue;
      std::size_t depth = nodes[head].depth + 1;
      if (seen.size() >= max_states) {
        result.reason = "state limit reached";
        return result;
      }
      const State* stored = &seen.emplace(std::move(next), nodes.size()).first->first;
      nodes.push_back(Node{stored, head, a, depth});
      if (world::holds(*stored, model.goal).satisfied) {
        result.plan = trace(nodes.size() - 1);
        return result;
      }
    }
  }
  result.reason = cut ? "depth limit reached" : "state space exhausted";
  return result;
}

Mutation mutate_plan(const Plan& plan, const Model& model, std::uint64_t seed) {
  std::vector<GroundAction> all = world::ground_actions(model);
  std::vector<std::vector<std::size_t>> candidates(plan.size());
  std::vector<std::size_t> eligible;
  State state = model.init;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    for (std::size_t a = 0; a < all.size(); ++a) {
      if (!world::applicable(state, all[a], model).satisfied) candidates[i].push_back(a);
    }
    if (!candidates[i].empty()) eligible.push_back(i);
    state = world::apply(state, plan[i], model);
  }
  if (eligible.empty()) throw Error(ErrorCode::NoMutationPossible, "no step admits an inapplicable action");
  domains::Rng rng(seed);
  std::size_t index = eligible[rng.uniform(0, eligible.size() - 1)];
  const auto& options = candidates[index];
  Mutation out{plan, index + 1};
  out.plan[index] = all[options[rng.uniform(0, options.size() - 1)]];
  return out;
}

std::size_t failing_step_of(const PriorAttempt& prior) {
  if (prior.failing_step && *prior.failing_step >= 1) return *prior.failing_step;
  static const std::regex at_step(R"(at step (\d{1,9}))");
  std::smatch m;
  if (std::regex_search(prior.feedback, m, at_step)) {
    std::size_t step = std::stoul(m[1].str());
    if (step >= 1) return step;
  }
  return 1;
}

std::shared_ptr<PlannerBackend> oracle_backend(OracleFn oracle) {
  return std::make_shared<OracleBackend>(std::move(oracle));
}

std::shared_ptr<PlannerBackend> repair_backend(OracleFn oracle) {
  return std::make_shared<RepairBackend>(std::move(oracle));
}

std::shared_ptr<PlannerBackend> fault_backend(std::uint64_t seed, OracleFn oracle) {
  return std::make_shared<FaultBackend>(seed, std::move(oracle));
}

std::shared_ptr<PlannerBackend> bfs_backend(std::size_t max_depth) {
  return std::make_shared<BfsBackend>(max_depth);
}

std::shared_ptr<PlannerBackend> llm_backend(std::shared_ptr<const llm::Client> client) {
  if (!client) throw Error(ErrorCode::ConfigError, "the llm planner needs a client");
  return std::make_shared<LlmBackend>(std::move(client));
}

std::shared_ptr<PlannerBackend> make_backend(std::string_view name, std::uint64_t seed,
                                             std::shared_ptr<const llm::Client> client) {
  if (name == "oracle") return oracle_backend();
  if (name == "repair") return repair_backend();
  if (name == "fault") return fault_backend(seed);
  if (name == "bfs") return bfs_backend(16);
  if (name == "llm") return llm_backend(std::move(client));
  throw Error(ErrorCode::ConfigError, "unknown planner '" + std::string(name) +
                                          "' (expected oracle, repair, fault, bfs or llm)");
}

}  // namespace planloop::planners
