#include <doctest.h>

#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "planloop/error.hpp"
#include "planloop/planners.hpp"
#include "planloop/validate.hpp"
#include "support.hpp"

using namespace planloop;
using namespace planloop::planners;
using world::GroundAction;
using world::Model;
using world::Plan;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::Io;
}

struct AppendixPlan {
  std::string kind;
  int example;
  std::size_t steps;
};

// Action counts read off the appendix planner answers.
const std::vector<AppendixPlan>& appendix_plans() {
  static const std::vector<AppendixPlan> plans = {
      {"cooking", 1, 21},     {"cooking", 2, 20},     {"cooking", 3, 28},     {"blocksworld", 1, 6},
      {"blocksworld", 2, 10}, {"blocksworld", 3, 12}, {"blocksworld", 4, 2},  {"blocksworld", 5, 6},
      {"ballmoving", 1, 8},   {"ballmoving", 2, 14},  {"ballmoving", 3, 11},
  };
  return plans;
}

std::string answer_text(const AppendixPlan& p) {
  return testing::read_fixture("prompts/planner/" + p.kind + "/example" + std::to_string(p.example) + ".answer.txt");
}

Model planner_model(const AppendixPlan& p) {
  return testing::fixture_model(p.kind,
                                "pddl/planner/" + p.kind + "/example" + std::to_string(p.example) + ".problem.pddl");
}

// Independent reading of an answer: every line that starts with "(" and whose
// first word names one of the family's actions; ball-moving pick and drop get
// robot1 in front.
Plan line_scan(const std::string& text, const std::string& kind) {
  static const std::map<std::string, std::set<std::string>> actions = {
      {"cooking", {"pick", "putdown", "add"}},
      {"blocksworld", {"pickup", "putdown", "stack", "unstack"}},
      {"ballmoving", {"move", "pick", "drop"}},
  };
  Plan plan;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] != '(') continue;
    std::istringstream words(line.substr(1, line.find(')') - 1));
    GroundAction a;
    words >> a.name;
    if (!actions.at(kind).contains(a.name)) continue;
    for (std::string w; words >> w;) a.args.push_back(w);
    if (kind == "ballmoving" && a.name != "move") a.args.insert(a.args.begin(), "robot1");
    plan.push_back(a);
  }
  return plan;
}

bool valid(const Model& m, const Plan& plan) {
  return validate::validate_plan(m, plan, validate::default_rules(m)).valid();
}

// All action sequences up to `depth` from the initial state, stopping at the
// first that reaches the goal. Returns the shortest length found.
std::optional<std::size_t> brute_force_shortest(const Model& m, std::size_t depth) {
  std::function<bool(const world::State&, std::size_t)> reach = [&](const world::State& s, std::size_t left) {
    if (world::holds(s, m.goal).satisfied) return true;
    if (left == 0) return false;
    for (const GroundAction& a : world::ground_actions(m)) {
      if (world::applicable(s, a, m).satisfied && reach(world::apply(s, a, m), left - 1)) return true;
    }
    return false;
  };
  for (std::size_t d = 0; d <= depth; ++d) {
    if (reach(m.init, d)) return d;
  }
  return std::nullopt;
}

Model blocks_model(const std::string& objects, const std::string& init, const std::string& goal) {
  return world::load_model(testing::domain_text("blocksworld"),
                           "(define (problem p) (:domain blocksworld) (:objects " + objects + ") (:init " + init +
                               ") (:goal (and " + goal + ")))");
}

PlanRequest request_for(const Model& m) { return PlanRequest{m, "", "", std::nullopt, std::nullopt}; }

}  // namespace

TEST_CASE("extract_plan reproduces every appendix planner answer") {
  for (const AppendixPlan& p : appendix_plans()) {
    CAPTURE(p.kind);
    CAPTURE(p.example);
    Model m = planner_model(p);
    std::string text = answer_text(p);
    Plan plan = extract_plan(text, m);
    CHECK(plan.size() == p.steps);
    CHECK(plan == line_scan(text, p.kind));
    CHECK(valid(m, plan));
  }
}

TEST_CASE("extract_plan details") {
  AppendixPlan cooking{"cooking", 1, 21};
  Plan plan = extract_plan(answer_text(cooking), planner_model(cooking));
  CHECK(plan.front() == GroundAction{"pick", {"ingredient1"}});

  AppendixPlan balls{"ballmoving", 1, 8};
  Model bm = planner_model(balls);
  Plan bp = extract_plan(answer_text(balls), bm);
  REQUIRE(bp.size() == 8);
  CHECK(bp[0] == GroundAction{"move", {"robot1", "room2", "room3"}});
  CHECK(bp[1] == GroundAction{"pick", {"robot1", "ball1", "room3"}});
  CHECK(extract_plan("(PICK ball1 room3)", bm) == Plan{{"pick", {"robot1", "ball1", "room3"}}});

  CHECK(code_of([&] { extract_plan("no actions here", bm); }) == ErrorCode::EmptyPlan);
  CHECK(code_of([&] { extract_plan("(at ball1 room3) (arm-empty)", bm); }) == ErrorCode::EmptyPlan);
  CHECK(code_of([&] { extract_plan("(move robot1)", bm); }) == ErrorCode::ArityMismatch);
  Model cm = planner_model(cooking);
  CHECK(code_of([&] { extract_plan("(pick)", cm); }) == ErrorCode::ArityMismatch);
  // Only the innermost expressions count: a wrapper is not a step, the
  // actions inside it are.
  CHECK(extract_plan("(and (pick ingredient1)) then (putdown ingredient1)", cm) ==
        Plan{{"pick", {"ingredient1"}}, {"putdown", {"ingredient1"}}});
}

TEST_CASE("adapt_arguments only fills a unique single-object slot") {
  AppendixPlan balls{"ballmoving", 1, 8};
  Model bm = planner_model(balls);
  CHECK(adapt_arguments(GroundAction{"drop", {"ball1", "room1"}}, bm) ==
        GroundAction{"drop", {"robot1", "ball1", "room1"}});
  CHECK(adapt_arguments(GroundAction{"drop", {"robot1", "ball1", "room1"}}, bm) ==
        GroundAction{"drop", {"robot1", "ball1", "room1"}});
  CHECK(adapt_arguments(GroundAction{"fly", {"ball1"}}, bm) == GroundAction{"fly", {"ball1"}});
  Model blocks = planner_model({"blocksworld", 1, 6});
  CHECK(adapt_arguments(GroundAction{"stack", {"b1"}}, blocks) == GroundAction{"stack", {"b1"}});
}

TEST_CASE("oracles reproduce the appendix strategies") {
  for (const AppendixPlan& p : appendix_plans()) {
    CAPTURE(p.kind);
    CAPTURE(p.example);
    Model m = planner_model(p);
    Plan oracle = oracle_plan(m);
    CHECK(valid(m, oracle));
    if (p.kind != "blocksworld") CHECK(oracle == extract_plan(answer_text(p), m));
  }
}

TEST_CASE("the blocksworld oracle keeps a correct bottom part") {
  Model m = planner_model({"blocksworld", 2, 10});
  Plan plan = oracle_blocksworld(m);
  CHECK(valid(m, plan));
  CHECK(plan.size() == 10);
  // b4 is already the goal tower's base: it is never picked up.
  for (const auto& a : plan) CHECK(!(a.name == "pickup" && a.args[0] == "b4"));

  Model done = blocks_model("b1 b2", "(on b1 b2) (on-table b2) (clear b1) (arm-empty)", "(on b1 b2) (on-table b2)");
  CHECK(oracle_blocksworld(done).empty());
  Model partial = blocks_model("b1 b2", "(on-table b1) (on-table b2) (clear b1) (clear b2) (arm-empty)",
                               "(on b1 b2)");
  CHECK(code_of([&] { oracle_blocksworld(partial); }) == ErrorCode::InvalidSpec);
}

TEST_CASE("the blocksworld oracle reproduces the grounding figure sequence") {
  Model m = blocks_model("b1 b2 b3 b4",
                         "(on b1 b2) (on-table b2) (on-table b3) (on-table b4) (clear b1) (clear b3) (clear b4) "
                         "(arm-empty)",
                         "(on b4 b1) (on b1 b3) (on b3 b2) (on-table b2)");
  Plan expected = world::parse_plan(
      "(unstack b1 b2) (putdown b1) (pickup b3) (stack b3 b2) (pickup b1) (stack b1 b3) (pickup b4) (stack b4 b1)");
  CHECK(oracle_blocksworld(m) == expected);
  CHECK(valid(m, expected));
}

TEST_CASE("oracle edge cases") {
  Model cooking = world::load_model(
      testing::domain_text("cooking"),
      "(define (problem p) (:domain cooking) (:objects pot1 - pot ingredient1 - ingredient) (:init (arm-empty) "
      "(pot-empty pot1)) (:goal (and)))");
  CHECK(oracle_cooking(cooking).empty());

  Model balls = world::load_model(testing::domain_text("ballmoving"),
                                  "(define (problem p) (:domain ballmoving) (:objects robot1 - robot room1 room2 - "
                                  "room ball1 - ball) (:init (arm-empty) (robot-at robot1 room2) (at ball1 room1)) "
                                  "(:goal (and (at ball1 room1))))");
  CHECK(oracle_ballmoving(balls).empty());

  Model odd = world::load_model("(define (domain other) (:predicates (p)) (:action a :parameters () :precondition "
                                "(and) :effect (p)))",
                                "(define (problem q) (:domain other) (:objects) (:init) (:goal (and (p))))");
  CHECK(code_of([&] { oracle_plan(odd); }) == ErrorCode::UnknownTaskKind);
}

TEST_CASE("bfs finds shortest plans") {
  Model three = world::load_model(testing::domain_text("blocksworld"),
                                  corpus::get("pddl/blocksworld/example1.problem.pddl"));
  SearchResult r = bfs_plan(three, 16);
  REQUIRE(r.plan.has_value());
  CHECK(r.plan->size() == 6);
  CHECK(brute_force_shortest(three, 6) == std::optional<std::size_t>(6));
  CHECK(valid(three, *r.plan));

  Model done = blocks_model("b1", "(on-table b1) (clear b1) (arm-empty)", "(on-table b1)");
  SearchResult empty = bfs_plan(done, 3);
  REQUIRE(empty.plan.has_value());
  CHECK(empty.plan->empty());

  Model unreachable = world::load_model(
      "(define (domain u) (:predicates (p) (q)) (:action a :parameters () :precondition (and) :effect (p)))",
      "(define (problem q) (:domain u) (:objects) (:init) (:goal (and (q))))");
  SearchResult none = bfs_plan(unreachable, 5);
  CHECK_FALSE(none.plan.has_value());
  CHECK(none.reason == "state space exhausted");

  SearchResult shallow = bfs_plan(three, 3);
  CHECK_FALSE(shallow.plan.has_value());
  CHECK(shallow.reason == "depth limit reached");

  SearchResult capped = bfs_plan(three, 16, 5);
  CHECK_FALSE(capped.plan.has_value());
  CHECK(capped.reason == "state limit reached");
}

TEST_CASE("bfs agrees with brute force and never exceeds the oracle") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    for (domains::TaskKind kind : {domains::TaskKind::Blocksworld, domains::TaskKind::BallMoving}) {
      int n = kind == domains::TaskKind::Blocksworld ? 3 : 1;
      Model m = testing::model_of(domains::gen_instance({kind, n, seed}));
      SearchResult r = bfs_plan(m, 16);
      REQUIRE(r.plan.has_value());
      CHECK(valid(m, *r.plan));
      CHECK(r.plan->size() <= oracle_plan(m).size());
      if (seed < 8) CHECK(brute_force_shortest(m, r.plan->size()) == std::optional<std::size_t>(r.plan->size()));
    }
  }
}

TEST_CASE("bfs on enriched cooking respects pick-once") {
  Model m = domains::enrich_cooking(testing::model_of(domains::gen_instance({domains::TaskKind::Cooking, 1, 4})));
  SearchResult r = bfs_plan(m, 16);
  REQUIRE(r.plan.has_value());
  CHECK(valid(m, *r.plan));
}

TEST_CASE("mutate_plan injects a failure exactly where it reports") {
  auto instances = testing::sample_instances(200, 77, 2, 5);
  for (std::size_t t = 0; t < instances.size(); ++t) {
    Model m = testing::model_of(instances[t]);
    Plan plan = oracle_plan(m);
    if (plan.empty()) continue;
    Mutation mut = mutate_plan(plan, m, t);
    CHECK(mut.plan.size() == plan.size());
    REQUIRE(mut.injected_step >= 1);
    REQUIRE(mut.injected_step <= plan.size());
    for (std::size_t i = 0; i < plan.size(); ++i) {
      if (i + 1 != mut.injected_step) CHECK(mut.plan[i] == plan[i]);
    }
    CHECK_FALSE(mut.plan[mut.injected_step - 1] == plan[mut.injected_step - 1]);
    validate::Verdict v = validate::validate_plan(m, mut.plan, validate::default_rules(m));
    CHECK_FALSE(v.valid());
    CHECK(v.failing_step == mut.injected_step);
    CHECK(std::holds_alternative<validate::PreconditionUnsatisfied>(*v.reason));

    Mutation again = mutate_plan(plan, m, t);
    CHECK(again.plan == mut.plan);
    CHECK(again.injected_step == mut.injected_step);
  }
}

TEST_CASE("mutate_plan errors") {
  Model m = world::load_model(testing::domain_text("blocksworld"),
                              corpus::get("pddl/blocksworld/example1.problem.pddl"));
  CHECK(code_of([&] { mutate_plan({}, m, 1); }) == ErrorCode::NoMutationPossible);
  CHECK(code_of([&] { mutate_plan({{"pickup", {"b1"}}}, m, 1); }) == ErrorCode::NotApplicable);
}

TEST_CASE("failing_step_of") {
  CHECK(failing_step_of({{}, "anything", 4}) == 4);
  CHECK(failing_step_of({{}, "The action (pickup b1) at step 7 is incorrect because x.", std::nullopt}) == 7);
  CHECK(failing_step_of({{}, "no step mentioned", std::nullopt}) == 1);
}

TEST_CASE("one repair round fixes one injected error") {
  std::size_t rounds = 0;
  for (const auto& instance : testing::sample_instances(150, 5, 2, 5)) {
    Model m = testing::model_of(instance);
    PlanRequest request = request_for(m);
    std::uint64_t seed = rounds++;
    auto fault = fault_backend(seed);
    Plan first = fault->produce(request).plan;
    validate::Verdict v = validate::validate_plan(m, first, validate::default_rules(m));
    if (v.valid()) continue;
    request.prior_attempt = PriorAttempt{first, validate::render_feedback(v, m), v.failing_step};
    Plan second = fault->produce(request).plan;
    CHECK(valid(m, second));

    // The prefix before the failure is kept.
    std::size_t keep = *v.failing_step - 1;
    REQUIRE(second.size() >= keep);
    CHECK(Plan(second.begin(), second.begin() + static_cast<long>(keep)) ==
          Plan(first.begin(), first.begin() + static_cast<long>(keep)));

    Plan repaired = repair_backend()->produce(request).plan;
    CHECK(repaired == second);
  }
  CHECK(rounds == 150);
}

TEST_CASE("repair at step 1 returns a fresh oracle plan") {
  Model m = planner_model({"blocksworld", 3, 12});
  PlanRequest request = request_for(m);
  request.prior_attempt = PriorAttempt{{{"pickup", {"b9"}}}, "The action (pickup b9) at step 1 is incorrect.", 1};
  CHECK(repair_backend()->produce(request).plan == oracle_plan(m));
}

TEST_CASE("deterministic backends repeat themselves") {
  Model m = testing::model_of(domains::gen_instance({domains::TaskKind::BallMoving, 4, 9}));
  PlanRequest request = request_for(m);
  for (const char* name : {"oracle", "repair", "fault", "bfs"}) {
    CAPTURE(name);
    auto a = make_backend(name, 3, nullptr);
    auto b = make_backend(name, 3, nullptr);
    CHECK(a->name() == name);
    CHECK(a->produce(request).plan == b->produce(request).plan);
  }
  CHECK(code_of([] { make_backend("llm", 0, nullptr); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { make_backend("astar", 0, nullptr); }) == ErrorCode::ConfigError);
}

TEST_CASE("llm backend parses the model's answer") {
  AppendixPlan p{"cooking", 1, 21};
  Model m = planner_model(p);
  std::string problem_text = testing::read_fixture("pddl/planner/cooking/example1.problem.pddl");
  PlanRequest request{m, testing::domain_text("cooking"), problem_text, std::nullopt, std::nullopt};

  auto transport = std::make_shared<testing::ScriptedTransport>();
  transport->push_completion(answer_text(p));
  auto backend = llm_backend(testing::live_client(transport));
  PlanResponse response = backend->produce(request);
  CHECK(response.plan.size() == 21);
  CHECK(response.raw_response == answer_text(p));
  REQUIRE(transport->requests.size() == 1);
  CHECK(response.prompt == prompts::build_planner_prompt(request.domain_text, problem_text).messages());

  // Connection failure and a malformed action both surface as backend failures.
  try {
    backend->produce(request);
    FAIL("expected a failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BackendFailure);
    CHECK(e.cause() == ErrorCode::Transport);
  }
  transport->push_completion("(pick)");
  try {
    backend->produce(request);
    FAIL("expected a failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BackendFailure);
    CHECK(e.cause() == ErrorCode::ArityMismatch);
  }
}

TEST_CASE("planner prompts") {
  std::string domain = testing::domain_text("blocksworld");
  std::string problem(corpus::get("pddl/blocksworld/example1.problem.pddl"));
  prompts::PromptBundle bundle = prompts::build_planner_prompt(domain, problem);
  CHECK(bundle.examples.size() == 5);
  CHECK(bundle.messages().size() == 1 + 2 * 5 + 1);
  CHECK(bundle.messages() == prompts::build_planner_prompt(domain, problem).messages());
  CHECK(prompts::build_planner_prompt(testing::domain_text("cooking"),
                                      testing::read_fixture("pddl/planner/cooking/example1.problem.pddl"))
            .examples.size() == 3);

  std::string feedback = "The action (pickup b3) at step 3 is incorrect because precondition (clear b3) is not "
                         "satisfied.";
  prompts::PromptBundle refine =
      prompts::build_planner_prompt(domain, problem, PriorAttempt{{{"pickup", {"b3"}}}, feedback, 3});
  CHECK(refine.question.find(feedback) != std::string::npos);
  CHECK(refine.question.find("(pickup b3)") != std::string::npos);
  CHECK(code_of([] {
          prompts::build_planner_prompt("(define (domain zz) (:predicates))",
                                        "(define (problem p) (:domain zz) (:objects) (:init) (:goal (and)))");
        }) == ErrorCode::UnknownTaskKind);
}
