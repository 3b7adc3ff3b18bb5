// Acceptance checks. Prints one PASS/FAIL line per criterion and exits 0 only
// when all of them pass.
//
//   planloop_acceptance [--fixtures DIR] [--record-replay FILE]
//
// --record-replay regenerates the recorded responses used by criterion 9.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "planloop/bench.hpp"
#include "planloop/corpus.hpp"
#include "planloop/domains.hpp"
#include "planloop/error.hpp"
#include "planloop/json_io.hpp"
#include "planloop/llm.hpp"
#include "planloop/planners.hpp"
#include "planloop/refine.hpp"
#include "planloop/validate.hpp"
#include "planloop/world.hpp"

using namespace planloop;
using domains::TaskKind;
using world::GroundAction;
using world::Model;
using world::Plan;
using Clock = std::chrono::steady_clock;

namespace {

std::string g_fixtures = PLANLOOP_FIXTURE_DIR;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string fixture(const std::string& rel) { return read_file(g_fixtures + "/" + rel); }

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool valid(const Model& m, const Plan& plan) {
  return validate::validate_plan(m, plan, validate::default_rules(m)).valid();
}

Model model_of(const domains::Instance& instance) {
  return world::load_model(instance.domain_text, instance.problem_text);
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

// 1. Every translator-example domain and problem reaches a print fixpoint.
Outcome corpus_round_trip() {
  auto start = Clock::now();
  Outcome out;
  int files = 0;
  for (TaskKind kind : domains::kAllKinds) {
    for (int k = 1; k <= 3; ++k) {
      std::string base = "pddl/" + std::string(domains::to_string(kind)) + "/example" + std::to_string(k);
      pddl::DomainDef d = pddl::parse_domain(corpus::get(base + ".domain.pddl"));
      std::string dt = pddl::print_domain(d);
      pddl::DomainDef d2 = pddl::parse_domain(dt);
      pddl::ProblemDef p = pddl::parse_problem(corpus::get(base + ".problem.pddl"), d);
      std::string pt = pddl::print_problem(p);
      pddl::ProblemDef p2 = pddl::parse_problem(pt, d2);
      bool ok = d2 == d && p2 == p && pddl::print_domain(d2) == dt && pddl::print_problem(p2) == pt;
      if (!ok) {
        out.pass = false;
        out.detail += " " + base;
      }
      files += 2;
    }
  }
  double secs = seconds_since(start);
  if (secs >= 1.0) out.pass = false;
  out.detail = std::to_string(files) + " files, " + std::to_string(secs) + " s" +
               (out.detail.empty() ? "" : "; mismatched:" + out.detail);
  return out;
}

struct Golden {
  std::string kind;
  int example;
  bool valid;
  bool goal_failure;
  std::size_t step;
  std::string action;
};

// Final verdicts of the fifteen self-validator examples and the action each
// analysis names as wrong.
const std::vector<Golden> kGolden = {
    {"cooking", 1, false, false, 6, "(add ingredient1 pot2)"},
    {"cooking", 2, false, false, 9, "(pick ingredient2)"},
    {"cooking", 3, false, true, 0, ""},
    {"cooking", 4, true, false, 0, ""},
    {"ballmoving", 1, false, false, 4, "(drop robot1 ball2 room3)"},
    {"ballmoving", 2, false, false, 1, "(pick robot1 ball2 room4)"},
    {"ballmoving", 3, false, false, 2, "(pick robot1 ball1 room1)"},
    {"ballmoving", 4, false, true, 0, ""},
    {"ballmoving", 5, true, false, 0, ""},
    {"blocksworld", 1, false, false, 5, "(unstack b1 b2)"},
    {"blocksworld", 2, true, false, 0, ""},
    {"blocksworld", 3, false, true, 0, ""},
    {"blocksworld", 4, false, false, 3, "(pickup b3)"},
    {"blocksworld", 5, true, false, 0, ""},
    {"blocksworld", 6, false, false, 4, "(stack b1 b3)"},
};

// 2.
Outcome golden_verdicts() {
  Outcome out;
  int matched = 0;
  for (const Golden& g : kGolden) {
    std::string base = "pddl/validator/" + g.kind + "/example" + std::to_string(g.example);
    Model m = world::load_model(corpus::get("pddl/" + g.kind + "/example1.domain.pddl"),
                                fixture(base + ".problem.pddl"));
    Plan plan = planners::adapt_arguments(world::parse_plan(fixture(base + ".plan")), m);
    validate::Verdict v = validate::validate_plan(m, plan, validate::default_rules(m));
    bool ok = v.valid() == g.valid;
    if (ok && !g.valid) {
      bool goal = v.reason && std::holds_alternative<validate::GoalUnsatisfied>(*v.reason);
      ok = goal == g.goal_failure;
      if (ok && goal) ok = v.failing_step == plan.size() + 1;
      if (ok && !goal) {
        auto blamed = blamed_action(*v.reason);
        ok = v.failing_step == g.step && blamed && world::to_string(*blamed) == g.action;
      }
    }
    if (ok) {
      ++matched;
    } else {
      out.pass = false;
      out.detail += " " + g.kind + "#" + std::to_string(g.example);
    }
  }
  out.detail = std::to_string(matched) + "/" + std::to_string(kGolden.size()) + " verdicts" +
               (out.detail.empty() ? "" : "; wrong:" + out.detail);
  return out;
}

// 3. The benchmark grid with the oracle planner and no refinement budget.
Outcome oracle_grid() {
  auto start = Clock::now();
  Outcome out;
  std::ostringstream rates;
  if (validate::default_rules(model_of(domains::gen_instance({TaskKind::Cooking, 3, 0}))).empty()) {
    out.pass = false;
    rates << " pick-once inactive for cooking;";
  }
  for (TaskKind kind : domains::kAllKinds) {
    for (int n : {3, 4}) {
      bench::BenchConfig c;
      c.kind = kind;
      c.n = n;
      c.num_cases = 30;
      c.planner = "oracle";
      c.method = bench::MethodKind::LlmDirect;
      bench::BenchResult r = bench::run_bench(c, bench::default_factory(c, nullptr));
      if (r.success_rate != 1.0 || r.cases.size() != 30) out.pass = false;
      rates << " " << domains::to_string(kind) << "/" << n << "=" << r.successes << "/30";
    }
  }
  double secs = seconds_since(start);
  if (secs >= 10.0) out.pass = false;
  out.detail = std::to_string(secs) + " s;" + rates.str();
  return out;
}

// 4.
Outcome bfs_cross_check() {
  auto start = Clock::now();
  Outcome out;
  int good = 0;
  std::size_t bfs_total = 0;
  std::size_t oracle_total = 0;
  for (const auto& instance : domains::gen_batch(TaskKind::Blocksworld, 3, 0, 30)) {
    Model m = model_of(instance);
    planners::SearchResult r = planners::bfs_plan(m, 16);
    Plan oracle = planners::oracle_plan(m);
    if (r.plan && valid(m, *r.plan) && r.plan->size() <= oracle.size()) {
      ++good;
      bfs_total += r.plan->size();
      oracle_total += oracle.size();
    } else {
      out.pass = false;
    }
  }
  double secs = seconds_since(start);
  if (secs >= 60.0) out.pass = false;
  out.detail = std::to_string(good) + "/30 instances, total length bfs " + std::to_string(bfs_total) +
               " vs oracle " + std::to_string(oracle_total) + ", " + std::to_string(secs) + " s";
  return out;
}

// The mutated plan first, then whatever the repair backend answers.
class MutatedThenRepair : public planners::PlannerBackend {
 public:
  explicit MutatedThenRepair(Plan first) : first_(std::move(first)) {}
  std::string name() const override { return "mutated-then-repair"; }
  planners::PlanResponse produce(const planners::PlanRequest& request) override {
    if (!request.prior_attempt) return {first_, {}, {}};
    return repair_->produce(request);
  }

 private:
  Plan first_;
  std::shared_ptr<planners::PlannerBackend> repair_ = planners::repair_backend();
};

// 5. A trial is a random (family, n, seed) whose oracle plan has a step that
// can be mutated; draws without one are redrawn and counted.
Outcome fault_injection() {
  Outcome out;
  domains::Rng rng(2024);
  int trials = 0;
  int located = 0;
  int converged = 0;
  int redrawn = 0;
  while (trials < 200) {
    TaskKind kind = domains::kAllKinds[rng.uniform(0, 2)];
    int n = static_cast<int>(rng.uniform(1, 5));
    std::uint64_t seed = rng.uniform(0, 999999);
    domains::Instance instance = domains::gen_instance({kind, n, seed});
    Model m = model_of(instance);
    Plan plan = planners::oracle_plan(m);
    planners::Mutation mut;
    try {
      mut = planners::mutate_plan(plan, m, seed);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoMutationPossible) throw;
      ++redrawn;
      continue;
    }
    ++trials;
    validate::Verdict v = validate::validate_plan(m, mut.plan, validate::default_rules(m));
    if (!v.valid() && v.failing_step == mut.injected_step) ++located;

    refine::IsrConfig config;
    config.max_refinements = 3;
    refine::Transcript t =
        refine::run_pipeline(instance, config, {std::make_shared<MutatedThenRepair>(mut.plan), nullptr});
    if (t.success() && t.records.size() <= 2) ++converged;
  }
  out.pass = located == 200 && converged == 200;
  out.detail = "(a) " + std::to_string(located) + "/200 located, (b) " + std::to_string(converged) +
               "/200 converged within 2 iterations; " + std::to_string(redrawn) + " draws had no mutable step";
  return out;
}

// 6.
Outcome figure_instance() {
  Outcome out;
  Model m = world::load_model(corpus::get("pddl/blocksworld/example1.domain.pddl"),
                              "(define (problem fig) (:domain blocksworld) (:objects b1 b2 b3 b4)"
                              " (:init (on b1 b2) (on-table b2) (on-table b3) (on-table b4) (clear b1)"
                              " (clear b3) (clear b4) (arm-empty))"
                              " (:goal (and (on b4 b1) (on b1 b3) (on b3 b2) (on-table b2))))");
  Plan plan = planners::oracle_plan(m);
  world::State s = m.init;
  for (const GroundAction& a : plan) s = world::apply(s, a, m);
  world::State expected;
  expected.atoms = {{"on", {"b4", "b1"}}, {"on", {"b1", "b3"}}, {"on", {"b3", "b2"}},
                    {"on-table", {"b2"}},  {"clear", {"b4"}},     {"arm-empty", {}}};

  std::multiset<std::string> caption = {"(unstack b1 b2)", "(putdown b1)",    "(pickup b3)",    "(stack b3 b2)",
                                        "(pickup b1)",     "(stack b1 b3)",   "(pickup b4)",    "(stack b4 b1)"};
  std::multiset<std::string> got;
  for (const GroundAction& a : plan) got.insert(world::to_string(a));

  out.pass = valid(m, plan) && s == expected && plan.size() == 8 && got == caption;
  out.detail = "length " + std::to_string(plan.size()) + (s == expected ? ", final state exact" : ", final state differs") +
               (got == caption ? ", actions match the caption" : ", actions differ from the caption");
  return out;
}

// Independent reading of a planner answer: lines opening with "(" whose first
// word is one of the family's actions. Ball-moving pick and drop gain robot1.
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

// 7.
Outcome extraction() {
  struct Case {
    std::string kind;
    int example;
    std::size_t steps;
  };
  const std::vector<Case> cases = {
      {"cooking", 1, 21},     {"cooking", 2, 20},     {"cooking", 3, 28},     {"blocksworld", 1, 6},
      {"blocksworld", 2, 10}, {"blocksworld", 3, 12}, {"blocksworld", 4, 2},  {"blocksworld", 5, 6},
      {"ballmoving", 1, 8},   {"ballmoving", 2, 14},  {"ballmoving", 3, 11},
  };
  Outcome out;
  int matched = 0;
  for (const Case& c : cases) {
    std::string name = c.kind + "/example" + std::to_string(c.example);
    Model m = world::load_model(corpus::get("pddl/" + c.kind + "/example1.domain.pddl"),
                                fixture("pddl/planner/" + name + ".problem.pddl"));
    std::string text = fixture("prompts/planner/" + name + ".answer.txt");
    Plan plan = planners::extract_plan(text, m);
    if (plan.size() == c.steps && plan == line_scan(text, c.kind)) {
      ++matched;
    } else {
      out.pass = false;
      out.detail += " " + name + "(" + std::to_string(plan.size()) + ")";
    }
  }
  out.detail = std::to_string(matched) + "/" + std::to_string(cases.size()) + " answers" +
               (out.detail.empty() ? "" : "; wrong:" + out.detail);
  return out;
}

bench::BenchResult synthetic(TaskKind kind, int n, bench::MethodKind method, const std::string& group,
                             std::size_t successes) {
  bench::BenchResult r;
  r.config.kind = kind;
  r.config.n = n;
  r.config.num_cases = 30;
  r.config.method = method;
  r.config.group = group;
  for (std::size_t i = 0; i < 30; ++i) r.cases.push_back({i, i < successes, 1, ""});
  r.successes = successes;
  r.success_rate = static_cast<double>(successes) / 30.0;
  return r;
}

// 8. The published success counts out of 30, fed in reverse so order cannot
// matter.
Outcome table_golden() {
  struct Row {
    TaskKind kind;
    int n;
    std::size_t counts[6];
  };
  const Row rows[] = {
      {TaskKind::Cooking, 3, {14, 20, 30, 30, 30, 30}},    {TaskKind::Cooking, 4, {12, 16, 19, 30, 30, 30}},
      {TaskKind::Blocksworld, 3, {6, 11, 21, 13, 18, 29}}, {TaskKind::Blocksworld, 4, {3, 5, 16, 12, 18, 24}},
      {TaskKind::BallMoving, 3, {10, 15, 21, 28, 30, 30}}, {TaskKind::BallMoving, 4, {5, 8, 17, 27, 28, 29}},
  };
  std::vector<bench::BenchResult> grid;
  for (const Row& row : rows) {
    for (int col = 0; col < 6; ++col) {
      grid.push_back(synthetic(row.kind, row.n, bench::kAllMethods[col % 3], col < 3 ? "GPT3.5" : "GPT4",
                               row.counts[col]));
    }
  }
  std::reverse(grid.begin(), grid.end());
  std::string table = bench::emit_table(grid, bench::TableFormat::Markdown);
  std::string golden = fixture("golden/table1.md");
  Outcome out;
  out.pass = table == golden;
  out.detail = out.pass ? std::to_string(golden.size()) + " bytes identical" : "table differs from golden/table1.md";
  return out;
}

// Answers queued responses in order; an empty queue refuses the connection.
class QueueTransport : public llm::Transport {
 public:
  void push(const std::string& content) {
    nlohmann::json j = {{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}};
    queue_.push_back(j.dump());
  }
  llm::HttpResponse post(const llm::HttpRequest&) override {
    if (queue_.empty()) throw Error(ErrorCode::Transport, "connection refused");
    std::string body = std::move(queue_.front());
    queue_.pop_front();
    return {200, body};
  }

 private:
  std::deque<std::string> queue_;
};

struct Scenario {
  domains::Instance instance;
  refine::IsrConfig config;
};

bool mutable_plan(const domains::Instance& instance) {
  Model m = model_of(instance);
  try {
    planners::mutate_plan(planners::oracle_plan(m), m, instance.spec.seed);
    return true;
  } catch (const Error&) {
    return false;
  }
}

// LLM translator and planner with each validator, on the first two n=3
// seeds per family whose oracle plan has a step to break.
std::vector<Scenario> replay_scenarios() {
  std::vector<Scenario> out;
  for (TaskKind kind : domains::kAllKinds) {
    int taken = 0;
    for (std::uint64_t seed = 0; taken < 2; ++seed) {
      domains::Instance instance = domains::gen_instance({kind, 3, seed});
      if (!mutable_plan(instance)) continue;
      ++taken;
      for (auto validator : {refine::ValidatorKind::External, refine::ValidatorKind::SelfLlm}) {
        refine::IsrConfig c;
        c.max_refinements = 3;
        c.translator_kind = refine::TranslatorKind::Llm;
        c.validator_kind = validator;
        c.planner_kind = "llm";
        out.push_back({instance, c});
      }
    }
  }
  return out;
}

// What a well-behaved model would say in one scenario: a faithful
// translation, a plan with one broken step, a self-check that finds it, and
// a repaired plan.
void script_responses(const Scenario& s, QueueTransport& transport) {
  domains::Translation tr = domains::reference_translate(s.instance.nl_text);
  transport.push("Domain file:\n\n" + pddl::print_domain(tr.domain) + "\n\nProblem file:\n\n" +
                 pddl::print_problem(tr.problem));
  Model m = model_of(s.instance);
  Plan plan = planners::oracle_plan(m);
  planners::Mutation mut = planners::mutate_plan(plan, m, s.instance.spec.seed);
  transport.push(world::format_plan(mut.plan));
  bool self = s.config.validator_kind == refine::ValidatorKind::SelfLlm;
  if (self) {
    std::string check;
    for (std::size_t i = 0; i < mut.injected_step; ++i) check += world::to_string(mut.plan[i]) + "\n";
    check += "The last action is wrong because its preconditions do not hold.\nFinal answer: No";
    transport.push(check);
  }
  planners::PlanRequest request{m, s.instance.domain_text, s.instance.problem_text,
                                planners::PriorAttempt{mut.plan, "", mut.injected_step}, std::nullopt};
  transport.push(world::format_plan(planners::repair_backend()->produce(request).plan));
  if (self) transport.push("Every action is applicable and the goal holds.\nFinal answer: Yes");
}

llm::LlmConfig replay_config(const std::string& path, llm::Mode mode) {
  llm::LlmConfig c;
  c.model = "gpt-4";
  c.mode = mode;
  c.retries = 0;
  c.fixture_path = path;
  return c;
}

std::vector<std::string> run_scenarios(const std::shared_ptr<llm::Client>& client,
                                       const std::function<void(const Scenario&)>& before = {}) {
  std::vector<std::string> dumps;
  for (const Scenario& s : replay_scenarios()) {
    if (before) before(s);
    refine::Transcript t = refine::run_pipeline(s.instance, s.config, {planners::llm_backend(client), client});
    dumps.push_back(json_io::to_json(t).dump(2));
  }
  return dumps;
}

std::vector<std::string> record(const std::string& path) {
  auto transport = std::make_shared<QueueTransport>();
  llm::LlmConfig c = replay_config(path, llm::Mode::Record);
  auto client = std::make_shared<llm::Client>(c, transport, std::make_shared<llm::ReplayStore>(path),
                                              [](std::chrono::milliseconds) {});
  return run_scenarios(client, [&](const Scenario& s) { script_responses(s, *transport); });
}

std::vector<std::string> replay(const std::string& path) {
  llm::LlmConfig c = replay_config(path, llm::Mode::Replay);
  auto client = std::make_shared<llm::Client>(c, nullptr, std::make_shared<llm::ReplayStore>(path));
  return run_scenarios(client);
}

// 9. The stored responses replay offline into identical transcripts, twice,
// and match a fresh recording of the same scripted model.
Outcome replay_identity() {
  Outcome out;
  std::string stored = g_fixtures + "/replay/pipeline.jsonl";
  if (!std::filesystem::exists(stored)) return {false, "missing " + stored};
  std::vector<std::string> first = replay(stored);
  std::vector<std::string> second = replay(stored);

  std::filesystem::path fresh =
      std::filesystem::temp_directory_path() / ("planloop-acceptance-" + std::to_string(::getpid()) + ".jsonl");
  std::filesystem::remove(fresh);
  std::vector<std::string> recorded = record(fresh.string());
  std::filesystem::remove(fresh);

  int successes = 0;
  for (const std::string& d : first) {
    nlohmann::json j = nlohmann::json::parse(d);
    if (j["outcome"] == "success" && j["iterations"].size() == 2) ++successes;
  }
  bool identical = first == second;
  bool current = first == recorded;
  out.pass = identical && current && successes == static_cast<int>(first.size());
  out.detail = std::to_string(first.size()) + " transcripts, " + (identical ? "byte-identical" : "differ") +
               " across replays, " + (current ? "equal to" : "different from") + " a fresh recording, " +
               std::to_string(successes) + " refined to success";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"planloop acceptance checks", "planloop_acceptance"};
  std::string record_path;
  app.add_option("--fixtures", g_fixtures, "Fixture directory");
  app.add_option("--record-replay", record_path, "Rewrite the recorded responses for the replay check and exit");
  CLI11_PARSE(app, argc, argv);

  if (!record_path.empty()) {
    std::filesystem::remove(record_path);
    std::size_t n = record(record_path).size();
    std::cout << "recorded " << n << " transcripts into " << record_path << "\n";
    return 0;
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"fixture parsing round trip", corpus_round_trip},
      {"golden validator verdicts", golden_verdicts},
      {"oracle success grid", oracle_grid},
      {"bfs cross-check", bfs_cross_check},
      {"fault-injection convergence", fault_injection},
      {"grounding figure instance", figure_instance},
      {"plan extraction fidelity", extraction},
      {"table layout golden", table_golden},
      {"replay transcript identity", replay_identity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
