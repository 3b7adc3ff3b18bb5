#include <doctest.h>

#include <map>
#include <set>

#include "planloop/error.hpp"
#include "planloop/json_io.hpp"
#include "planloop/planners.hpp"
#include "planloop/validate.hpp"
#include "support.hpp"

using namespace planloop;
using namespace planloop::domains;

namespace {

std::string question(const std::string& kind, int example) {
  std::string text(corpus::get("prompts/translator/" + kind + "/example" + std::to_string(example) + ".question.txt"));
  while (!text.empty() && (text.back() == '\n' || text.back() == ' ')) text.pop_back();
  return text;
}

template <class T>
std::set<T> as_set(const std::vector<T>& v) {
  return {v.begin(), v.end()};
}

// Init, goal and objects compared as sets: the appendix lists atoms in its
// own order.
void check_same_problem(const pddl::ProblemDef& a, const pddl::ProblemDef& b) {
  CHECK(a.domain_name == b.domain_name);
  CHECK(as_set(a.objects) == as_set(b.objects));
  CHECK(as_set(a.init) == as_set(b.init));
  CHECK(as_set(a.goal) == as_set(b.goal));
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::Io;
}

// Forests of towers over 3 labelled blocks, keyed by their sorted towers.
std::string forest_key(const BlocksMeta& m) {
  std::string key;
  for (const auto& t : m.towers) {
    key += "[";
    for (int b : t) key += std::to_string(b);
    key += "]";
  }
  return key;
}

}  // namespace

TEST_CASE("mt19937_64 reference output") {
  // The 10000th output of a default-seeded mt19937_64 is fixed by the C++
  // standard; the generator must use exactly that engine.
  Rng rng(5489);
  for (int i = 0; i < 9999; ++i) rng.next();
  CHECK(rng.next() == 9981545732273789042ull);
}

TEST_CASE("Rng bounds") {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    std::uint64_t x = rng.uniform(3, 7);
    CHECK(x >= 3);
    CHECK(x <= 7);
  }
  CHECK(rng.uniform(5, 5) == 5);
  for (int i = 0; i < 1000; ++i) CHECK(rng.uniform128(13) < 13);
}

TEST_CASE("render_nl reproduces the appendix questions") {
  CHECK(render_nl(BlocksMeta{{{1, 3}, {2}}, {3, 2, 1}}) == question("blocksworld", 1));
  CHECK(render_nl(BlocksMeta{{{1, 3}, {4, 2}}, {4, 1, 2, 3}}) == question("blocksworld", 2));
  CHECK(render_nl(BlocksMeta{{{1}, {2, 3}, {4, 5}}, {5, 2, 4, 1, 3}}) == question("blocksworld", 3));
  CHECK(render_nl(CookingMeta{{{1, 4}, {2, 3, 5, 6}, {1, 4, 5}}}) == question("cooking", 1));
  CHECK(render_nl(CookingMeta{{{2, 3, 6}, {1, 2, 5}, {5, 6}, {2, 4, 6}}}) == question("cooking", 2));
  CHECK(render_nl(BallMeta{2, {3, 2, 4}, {1, 2, 3}}) == question("ballmoving", 1));
  CHECK(render_nl(BallMeta{3, {1, 3, 1, 2}, {3, 2, 4, 4}}) == question("ballmoving", 2));
}

TEST_CASE("the appendix blocksworld layout builds the expected problem") {
  Instance i = make_instance({TaskKind::Blocksworld, 3, 0}, BlocksMeta{{{1, 3}, {2}}, {3, 2, 1}});
  world::Model m = testing::model_of(i);
  std::set<std::string> init;
  for (const auto& a : m.init.atoms) init.insert(world::to_string(a));
  CHECK(init == std::set<std::string>{"(on-table b1)", "(on-table b2)", "(on b3 b1)", "(clear b2)", "(clear b3)",
                                      "(arm-empty)"});
  std::set<std::string> goal;
  for (const auto& a : m.goal) goal.insert(world::to_string(a));
  CHECK(goal == std::set<std::string>{"(on b1 b2)", "(on b2 b3)", "(on-table b3)"});
}

TEST_CASE("reference_translate matches the appendix translations") {
  for (const std::string& kind : testing::kinds()) {
    for (int example = 1; example <= 3; ++example) {
      // The third cooking answer omits ingredient1 from pot2 although the
      // question lists it; that pair is not a faithful translation.
      if (kind == "cooking" && example == 3) continue;
      CAPTURE(kind);
      CAPTURE(example);
      Translation t = reference_translate(question(kind, example));
      CHECK(t.kind == parse_task_kind(kind));
      std::string prefix = "prompts/translator/" + kind + "/example" + std::to_string(example);
      pddl::DomainDef appendix_domain = pddl::parse_domain(corpus::get("pddl/" + kind + "/example1.domain.pddl"));
      CHECK(t.domain == appendix_domain);
      pddl::ProblemDef appendix = pddl::parse_problem(
          corpus::get("pddl/" + kind + "/example" + std::to_string(example) + ".problem.pddl"), appendix_domain);
      check_same_problem(t.problem, appendix);
    }
  }
}

TEST_CASE("appendix ball moving example 2 init") {
  Translation t = reference_translate(question("ballmoving", 2));
  std::set<std::string> init;
  for (const auto& a : t.problem.init) init.insert(pddl::to_string(a));
  CHECK(init == std::set<std::string>{"(robot-at robot1 room3)", "(at ball1 room1)", "(at ball2 room3)",
                                      "(at ball3 room1)", "(at ball4 room2)", "(arm-empty)"});
}

TEST_CASE("template mismatches") {
  CHECK(code_of([] { reference_translate("I have 3 cups. Initially: nothing."); }) == ErrorCode::TemplateMismatch);
  CHECK(code_of([] { reference_translate(""); }) == ErrorCode::TemplateMismatch);
  std::string broken = question("blocksworld", 1);
  broken.replace(broken.find("on top of"), 9, "beside");
  CHECK(code_of([&] { reference_translate(broken); }) == ErrorCode::TemplateMismatch);
}

TEST_CASE("generation is deterministic and validates its spec") {
  for (TaskKind kind : kAllKinds) {
    Instance a = gen_instance({kind, 4, 12345});
    Instance b = gen_instance({kind, 4, 12345});
    CHECK(a.nl_text == b.nl_text);
    CHECK(a.problem_text == b.problem_text);
    CHECK(a.meta == b.meta);
    CHECK(code_of([&] { gen_instance({kind, 0, 1}); }) == ErrorCode::InvalidSpec);
  }
  CHECK(code_of([] { gen_instance({TaskKind::Blocksworld, kMaxBlocks + 1, 1}); }) == ErrorCode::InvalidSpec);
  CHECK_NOTHROW(gen_instance({TaskKind::Blocksworld, kMaxBlocks, 1}));
}

TEST_CASE("cooking recipes have 2 to 4 distinct ingredients, sizes uniform") {
  std::map<std::size_t, int> sizes;
  std::map<int, int> ingredient_use;
  int recipes = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const CookingMeta meta = std::get<CookingMeta>(gen_instance({TaskKind::Cooking, 3, seed}).meta);
    REQUIRE(meta.recipes.size() == 3);
    for (const auto& r : meta.recipes) {
      ++sizes[r.size()];
      ++recipes;
      CHECK(std::is_sorted(r.begin(), r.end()));
      CHECK(std::adjacent_find(r.begin(), r.end()) == r.end());
      for (int i : r) {
        CHECK(i >= 1);
        CHECK(i <= kIngredients);
        ++ingredient_use[i];
      }
    }
  }
  CHECK(sizes.size() == 3);
  for (std::size_t s = 2; s <= 4; ++s) {
    // 3000 recipes, 1000 expected per size, sigma about 26.
    CHECK(sizes[s] > 870);
    CHECK(sizes[s] < 1130);
  }
  for (int i = 1; i <= kIngredients; ++i) {
    // Expected 3000 * 3 / 6 = 1500 uses per ingredient.
    CHECK(ingredient_use[i] > 1350);
    CHECK(ingredient_use[i] < 1650);
  }
}

TEST_CASE("blocksworld initial forests are uniform over the 13 forests of 3 blocks") {
  std::map<std::string, int> counts;
  const int samples = 13000;
  for (int seed = 0; seed < samples; ++seed) {
    ++counts[forest_key(std::get<BlocksMeta>(gen_instance({TaskKind::Blocksworld, 3, static_cast<std::uint64_t>(seed)}).meta))];
  }
  CHECK(counts.size() == 13);
  for (const auto& [key, count] : counts) {
    CAPTURE(key);
    // 1000 expected, sigma about 30.
    CHECK(count > 850);
    CHECK(count < 1150);
  }
}

TEST_CASE("blocksworld and ball moving initial states are consistent") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    int n = 1 + static_cast<int>(seed % 7);
    world::Model blocks = testing::model_of(gen_instance({TaskKind::Blocksworld, n, seed}));
    std::map<std::string, int> supports;
    std::map<std::string, std::string> below;
    std::set<std::string> covered;
    for (const auto& a : blocks.init.atoms) {
      if (a.predicate == "on-table") ++supports[a.args[0]];
      if (a.predicate == "on") {
        ++supports[a.args[0]];
        below[a.args[0]] = a.args[1];
        covered.insert(a.args[1]);
      }
    }
    for (const auto& o : blocks.objects) {
      CHECK(supports[o.name] == 1);
      CHECK(blocks.init.contains({"clear", {o.name}}) == !covered.contains(o.name));
      // Acyclic: walking down reaches the table within n steps.
      std::string at = o.name;
      int steps = 0;
      while (below.contains(at) && steps <= n) {
        at = below[at];
        ++steps;
      }
      CHECK(steps <= n - 1);
    }
    CHECK(blocks.init.contains({"arm-empty", {}}));
    const std::vector<int> goal_tower = std::get<BlocksMeta>(gen_instance({TaskKind::Blocksworld, n, seed}).meta).goal_tower;
    CHECK(as_set(goal_tower).size() == static_cast<std::size_t>(n));

    world::Model balls = testing::model_of(gen_instance({TaskKind::BallMoving, n, seed}));
    int robot_at = 0;
    std::map<std::string, int> ball_at;
    for (const auto& a : balls.init.atoms) {
      if (a.predicate == "robot-at") ++robot_at;
      if (a.predicate == "at") ++ball_at[a.args[0]];
    }
    CHECK(robot_at == 1);
    CHECK(ball_at.size() == static_cast<std::size_t>(n));
    for (const auto& [ball, count] : ball_at) CHECK(count == 1);
  }
}

TEST_CASE("render_nl is injective and reference_translate inverts it") {
  for (TaskKind kind : kAllKinds) {
    std::map<std::string, InstanceMeta> seen;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      Instance i = gen_instance({kind, 3, seed});
      auto [it, inserted] = seen.emplace(i.nl_text, i.meta);
      if (!inserted) CHECK(it->second == i.meta);
      if (seed < 100) {
        Translation t = reference_translate(i.nl_text);
        pddl::DomainDef d = pddl::parse_domain(i.domain_text);
        CHECK(t.domain == d);
        CHECK(t.problem == pddl::parse_problem(i.problem_text, d));
      }
    }
  }
  for (const auto& i : testing::sample_instances(200, 8, 1, 8)) {
    Translation t = reference_translate(i.nl_text);
    CHECK(t.problem == pddl::parse_problem(i.problem_text, t.domain));
  }
}

TEST_CASE("every generated instance is solved by its oracle") {
  for (TaskKind kind : kAllKinds) {
    for (int n : {3, 4}) {
      for (std::uint64_t seed = 0; seed < 100; ++seed) {
        world::Model m = testing::model_of(gen_instance({kind, n, seed}));
        world::Plan plan = planners::oracle_plan(m);
        CHECK(validate::validate_plan(m, plan, validate::default_rules(m)).valid());
      }
    }
  }
}

TEST_CASE("gen_batch yields distinct instances with recorded seeds") {
  std::vector<Instance> batch = gen_batch(TaskKind::Blocksworld, 3, 7, 30);
  REQUIRE(batch.size() == 30);
  std::set<std::string> texts;
  for (const auto& i : batch) {
    texts.insert(i.nl_text);
    CHECK(gen_instance(i.spec).nl_text == i.nl_text);
  }
  CHECK(texts.size() == 30);
  // Only 13 * 6 distinct blocksworld instances exist for n = 2... fewer for
  // n = 1, so an oversized request must fail.
  CHECK(code_of([] { gen_batch(TaskKind::Blocksworld, 1, 0, 2); }) == ErrorCode::InvalidSpec);
}

TEST_CASE("cooking enrichment") {
  const pddl::DomainDef& canonical = canonical_domain(TaskKind::Cooking);
  pddl::DomainDef enriched = enrich_cooking_domain(canonical);
  const pddl::ActionSchema* pick = enriched.find_action("pick");
  REQUIRE(pick != nullptr);
  std::set<std::string> pre;
  for (const auto& l : pick->precondition) pre.insert(pddl::to_string(l));
  CHECK(pre == std::set<std::string>{"(arm-empty)", "(unused ?i)"});
  CHECK(pddl::print_domain(enriched).find("(unused ?i)") != std::string::npos);
  CHECK(code_of([&] { enrich_cooking_domain(enriched); }) == ErrorCode::AlreadyEnriched);
  CHECK(code_of([] { enrich_cooking_domain(canonical_domain(TaskKind::Blocksworld)); }) ==
        ErrorCode::NotCookingDomain);

  world::Model m = domains::enrich_cooking(testing::model_of(gen_instance({TaskKind::Cooking, 3, 1})));
  CHECK(m.init.contains({"unused", {"ingredient1"}}));
  world::State s = world::apply(m.init, {"pick", {"ingredient1"}}, m);
  s = world::apply(s, {"putdown", {"ingredient1"}}, m);
  CHECK_FALSE(world::applicable(s, {"pick", {"ingredient1"}}, m).satisfied);
}

TEST_CASE("instance JSON round-trips") {
  for (const auto& i : testing::sample_instances(30, 99)) {
    json_io::json j = json_io::to_json(i);
    Instance back = json_io::instance_from_json(j);
    CHECK(back.spec == i.spec);
    CHECK(back.meta == i.meta);
    CHECK(back.nl_text == i.nl_text);
    CHECK(back.problem_text == i.problem_text);
    CHECK(json_io::to_json(back) == j);
  }
}

TEST_CASE("names and kinds") {
  CHECK(number_word(3) == "three");
  CHECK(number_word(4) == "four");
  CHECK(parse_task_kind("Blocksworld") == TaskKind::Blocksworld);
  CHECK(parse_task_kind("ballmoving") == TaskKind::BallMoving);
  CHECK(code_of([] { parse_task_kind("gripper"); }) == ErrorCode::UnknownTaskKind);
  CHECK(display_name(TaskKind::BallMoving) == "Ball Moving");
  CHECK(detect_question_kind(question("cooking", 1)) == TaskKind::Cooking);
  CHECK_FALSE(detect_question_kind("hello").has_value());
}
