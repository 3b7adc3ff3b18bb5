// Command-line front end over the C API.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "planloop.h"

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string read_stdin() {
  return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
}

// Owns a string returned by the library.
struct Owned {
  char* text = nullptr;
  ~Owned() { planloop_string_free(text); }
  std::string str() const { return text == nullptr ? std::string() : std::string(text); }
};

int report(planloop_status status) {
  std::cerr << "error: " << planloop_last_error() << '\n';
  return status == PLANLOOP_ERR_INVALID_ARGUMENT ? 2 : 1;
}

int emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << '\n';
    return 0;
  }
  std::ofstream out(out_path, std::ios::binary);
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
  if (!out) {
    std::cerr << "error: Io: cannot write " << out_path << '\n';
    return 1;
  }
  return 0;
}

std::string pretty(const std::string& compact) { return json::parse(compact).dump(2); }

// "-plan" and friends become "--plan"; short flags and negative numbers pass.
std::vector<std::string> normalize_args(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a.size() > 2 && a[0] == '-' && a[1] != '-' && std::isalpha(static_cast<unsigned char>(a[1]))) {
      a.insert(0, "-");
    }
    args.push_back(a);
  }
  std::reverse(args.begin(), args.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"planloop: PDDL tools, plan validation and the iterative self-refinement loop", "planloop"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(planloop_version()));

  std::string out_path;
  int code = 0;

  // parse
  auto* parse = app.add_subcommand("parse", "Parse PDDL and print the canonical AST as JSON");
  std::string parse_domain, parse_problem;
  parse->add_option("-d,--domain", parse_domain, "Domain file")->required()->check(CLI::ExistingFile);
  parse->add_option("-p,--problem", parse_problem, "Problem file")->check(CLI::ExistingFile);
  parse->add_option("-o,--out", out_path, "Output file (default stdout)");
  parse->callback([&] {
    Owned out;
    std::string domain = read_file(parse_domain);
    planloop_status s = parse_problem.empty()
                            ? planloop_parse_domain(domain.c_str(), &out.text)
                            : planloop_parse_problem(domain.c_str(), read_file(parse_problem).c_str(), &out.text);
    code = s == PLANLOOP_OK ? emit(pretty(out.str()), out_path) : report(s);
  });

  // validate
  auto* validate = app.add_subcommand("validate", "Check a plan; exit 0 when valid, 1 when not");
  std::string val_domain, val_problem, val_plan;
  validate->add_option("-d,--domain", val_domain, "Domain file")->required()->check(CLI::ExistingFile);
  validate->add_option("-p,--problem", val_problem, "Problem file")->required()->check(CLI::ExistingFile);
  validate->add_option("--plan", val_plan, "Plan file, one action per line")->required()->check(CLI::ExistingFile);
  validate->add_option("-o,--out", out_path, "Output file (default stdout)");
  validate->callback([&] {
    planloop_model* model = nullptr;
    planloop_status s = planloop_model_create(read_file(val_domain).c_str(), read_file(val_problem).c_str(), &model);
    if (s != PLANLOOP_OK) {
      code = report(s);
      return;
    }
    int valid = 0;
    Owned out;
    s = planloop_validate(model, read_file(val_plan).c_str(), &valid, &out.text);
    planloop_model_destroy(model);
    if (s != PLANLOOP_OK) {
      code = report(s);
      return;
    }
    code = emit(pretty(out.str()), out_path);
    if (code == 0 && valid == 0) code = 1;
  });

  // gen
  auto* gen = app.add_subcommand("gen", "Generate unique problem instances as JSON");
  std::string gen_kind;
  int gen_n = 3, gen_count = 1;
  std::uint64_t gen_seed = 0;
  gen->add_option("--kind", gen_kind, "cooking, blocksworld or ballmoving")->required();
  gen->add_option("--n", gen_n, "Number of pots, blocks or balls");
  gen->add_option("--seed", gen_seed, "Base seed");
  gen->add_option("--count", gen_count, "Number of instances");
  gen->add_option("-o,--out", out_path, "Output file (default stdout)");
  gen->callback([&] {
    json spec = {{"kind", gen_kind}, {"n", gen_n}, {"seed", gen_seed}, {"count", gen_count}};
    Owned out;
    planloop_status s = planloop_generate(spec.dump().c_str(), &out.text);
    code = s == PLANLOOP_OK ? emit(pretty(out.str()), out_path) : report(s);
  });

  // solve
  auto* solve = app.add_subcommand("solve", "Produce a plan with the oracle or breadth-first search");
  std::string solve_domain, solve_problem, solve_planner = "oracle";
  std::size_t solve_depth = 16;
  solve->add_option("-d,--domain", solve_domain, "Domain file")->required()->check(CLI::ExistingFile);
  solve->add_option("-p,--problem", solve_problem, "Problem file")->required()->check(CLI::ExistingFile);
  solve->add_option("--planner", solve_planner, "oracle or bfs")->check(CLI::IsMember({"oracle", "bfs"}));
  solve->add_option("--max-depth", solve_depth, "Search depth limit for bfs");
  solve->add_option("-o,--out", out_path, "Output file (default stdout)");
  solve->callback([&] {
    planloop_model* model = nullptr;
    planloop_status s =
        planloop_model_create(read_file(solve_domain).c_str(), read_file(solve_problem).c_str(), &model);
    if (s != PLANLOOP_OK) {
      code = report(s);
      return;
    }
    json options = {{"planner", solve_planner}, {"max_depth", solve_depth}};
    Owned out;
    s = planloop_solve(model, options.dump().c_str(), &out.text);
    planloop_model_destroy(model);
    if (s != PLANLOOP_OK) {
      code = report(s);
      return;
    }
    std::string text;
    for (const json& action : json::parse(out.str())) text += action.get<std::string>() + "\n";
    code = emit(text, out_path);
  });

  // isr
  auto* isr = app.add_subcommand("isr", "Run the refinement loop on one instance and write its transcript");
  std::string isr_kind = "cooking", isr_method = "isr-external", isr_planner = "oracle",
              isr_translator = "reference", isr_nl;
  int isr_n = 3, isr_iters = 10;
  std::uint64_t isr_seed = 0;
  isr->add_option("--kind", isr_kind, "cooking, blocksworld or ballmoving");
  isr->add_option("--n", isr_n, "Number of pots, blocks or balls");
  isr->add_option("--seed", isr_seed, "Instance seed");
  isr->add_option("--method", isr_method, "llm-direct, isr-self or isr-external");
  isr->add_option("--max-iters", isr_iters, "Refinement budget");
  isr->add_option("--planner", isr_planner, "oracle, repair, fault, bfs or llm");
  isr->add_option("--translator", isr_translator, "reference or llm");
  isr->add_option("--nl", isr_nl, "Question text file; overrides --kind/--n/--seed")->check(CLI::ExistingFile);
  isr->add_option("-o,--out", out_path, "Transcript file (default stdout)");
  isr->callback([&] {
    json config = {{"kind", isr_kind},           {"n", isr_n},
                   {"seed", isr_seed},           {"method", isr_method},
                   {"max_refinements", isr_iters}, {"planner", isr_planner},
                   {"translator", isr_translator}};
    if (!isr_nl.empty()) config["nl_text"] = read_file(isr_nl);
    Owned out;
    planloop_status s = planloop_run_isr(config.dump().c_str(), &out.text);
    if (s != PLANLOOP_OK) {
      code = report(s);
      return;
    }
    json transcript = json::parse(out.str());
    code = emit(transcript.dump(2), out_path);
    std::cerr << "outcome: " << transcript["outcome"].get<std::string>() << " after "
              << transcript["iterations"].size() << " iteration(s)\n";
    if (code == 0 && transcript["outcome"] != "success") code = 1;
  });

  // bench
  auto* bench = app.add_subcommand("bench", "Run a batch of instances and report the success rate");
  std::string b_kind = "cooking", b_method = "isr-external", b_planner = "oracle", b_translator = "reference",
              b_group, b_transcripts, b_format = "json";
  int b_n = 3, b_cases = 30, b_iters = 10;
  std::uint64_t b_seed = 0;
  std::size_t b_jobs = 1;
  bench->add_option("--kind", b_kind, "cooking, blocksworld or ballmoving");
  bench->add_option("--n", b_n, "Number of pots, blocks or balls");
  bench->add_option("--cases", b_cases, "Number of unique instances");
  bench->add_option("--seed", b_seed, "Base seed");
  bench->add_option("--method", b_method, "llm-direct, isr-self or isr-external");
  bench->add_option("--max-iters", b_iters, "Refinement budget");
  bench->add_option("--planner", b_planner, "oracle, repair, fault, bfs or llm");
  bench->add_option("--translator", b_translator, "reference or llm");
  bench->add_option("--group", b_group, "Column group label for tables");
  bench->add_option("--jobs", b_jobs, "Cases in flight at once");
  bench->add_option("--transcripts", b_transcripts, "Directory for per-case transcripts");
  bench->add_option("--format", b_format, "json, markdown or csv")->check(CLI::IsMember({"json", "markdown", "csv"}));
  bench->add_option("-o,--out", out_path, "Output file (default stdout)");
  bench->callback([&] {
    json config = {{"kind", b_kind},        {"n", b_n},
                   {"num_cases", b_cases},  {"base_seed", b_seed},
                   {"method", b_method},    {"max_refinements", b_iters},
                   {"planner", b_planner},  {"translator", b_translator},
                   {"group", b_group},      {"max_in_flight", b_jobs},
                   {"transcripts_dir", b_transcripts}};
    Owned out;
    planloop_status s = planloop_run_bench(config.dump().c_str(), &out.text);
    if (s != PLANLOOP_OK) {
      code = report(s);
      return;
    }
    if (b_format == "json") {
      code = emit(pretty(out.str()), out_path);
      return;
    }
    std::string results = "[" + out.str() + "]";
    Owned table;
    s = planloop_emit_table(results.c_str(), b_format.c_str(), "method", &table.text);
    code = s == PLANLOOP_OK ? emit(table.str(), out_path) : report(s);
  });

  // emit-table
  auto* table = app.add_subcommand("emit-table", "Format saved bench results as a success-rate table");
  std::vector<std::string> t_inputs;
  std::string t_format = "markdown", t_layout = "method";
  table->add_option("results", t_inputs, "Bench result JSON files")->required()->check(CLI::ExistingFile);
  table->add_option("--format", t_format, "markdown, csv or json")->check(CLI::IsMember({"json", "markdown", "csv"}));
  table->add_option("--layout", t_layout, "method or translator")->check(CLI::IsMember({"method", "translator"}));
  table->add_option("-o,--out", out_path, "Output file (default stdout)");
  table->callback([&] {
    json results = json::array();
    for (const std::string& path : t_inputs) {
      json parsed = json::parse(read_file(path), nullptr, false);
      if (parsed.is_discarded()) {
        std::cerr << "error: ConfigError: " << path << " is not JSON\n";
        code = 1;
        return;
      }
      if (parsed.is_array()) {
        for (json& r : parsed) results.push_back(std::move(r));
      } else {
        results.push_back(std::move(parsed));
      }
    }
    Owned out;
    planloop_status s = planloop_emit_table(results.dump().c_str(), t_format.c_str(), t_layout.c_str(), &out.text);
    code = s == PLANLOOP_OK ? emit(out.str(), out_path) : report(s);
  });

  // translate
  auto* translate = app.add_subcommand("translate", "Translate a question into PDDL");
  std::string tr_nl, tr_translator = "reference", tr_domain_out, tr_problem_out;
  translate->add_option("--nl", tr_nl, "Question text file (default stdin)")->check(CLI::ExistingFile);
  translate->add_option("--translator", tr_translator, "reference or llm")->check(CLI::IsMember({"reference", "llm"}));
  translate->add_option("--domain-out", tr_domain_out, "Write the domain here");
  translate->add_option("--problem-out", tr_problem_out, "Write the problem here");
  translate->callback([&] {
    std::string nl = tr_nl.empty() ? read_stdin() : read_file(tr_nl);
    json options = {{"translator", tr_translator}};
    Owned out;
    planloop_status s = planloop_translate(nl.c_str(), options.dump().c_str(), &out.text);
    if (s != PLANLOOP_OK) {
      code = report(s);
      return;
    }
    json result = json::parse(out.str());
    if (tr_domain_out.empty() && tr_problem_out.empty()) {
      code = emit(result["domain"].get<std::string>() + "\n" + result["problem"].get<std::string>(), "");
      return;
    }
    if (!tr_domain_out.empty()) code = emit(result["domain"].get<std::string>(), tr_domain_out);
    if (code == 0 && !tr_problem_out.empty()) code = emit(result["problem"].get<std::string>(), tr_problem_out);
  });

  std::vector<std::string> args = normalize_args(argc, argv);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return code;
}
