#include "planloop/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "planloop/error.hpp"
#include "planloop/json_io.hpp"

namespace planloop::bench {

namespace {

struct Column {
  std::string group;
  int translator = 0;
  MethodKind method = MethodKind::LlmDirect;
  auto operator<=>(const Column&) const = default;
};

std::string_view translator_label(refine::TranslatorKind kind) {
  return kind == refine::TranslatorKind::Llm ? "LLM translator" : "Reference translator";
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string case_file_name(std::size_t index, std::uint64_t seed) {
  std::string idx = std::to_string(index);
  idx.insert(0, idx.size() < 3 ? 3 - idx.size() : 0, '0');
  return "case-" + idx + "-seed-" + std::to_string(seed) + ".json";
}

}  // namespace

std::string_view to_string(MethodKind method) {
  switch (method) {
    case MethodKind::LlmDirect: return "llm-direct";
    case MethodKind::IsrSelf: return "isr-self";
    case MethodKind::IsrExternal: return "isr-external";
  }
  return "?";
}

std::string_view display_name(MethodKind method) {
  switch (method) {
    case MethodKind::LlmDirect: return "LLM-direct";
    case MethodKind::IsrSelf: return "ISR-LLM-self";
    case MethodKind::IsrExternal: return "ISR-LLM-external";
  }
  return "?";
}

MethodKind parse_method(std::string_view name) {
  std::string s;
  for (char c : name) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (MethodKind m : kAllMethods) {
    std::string display(display_name(m));
    std::transform(display.begin(), display.end(), display.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == to_string(m) || s == display) return m;
  }
  throw Error(ErrorCode::ConfigError,
              "unknown method '" + std::string(name) + "' (llm-direct, isr-self or isr-external)");
}

refine::IsrConfig method_config(MethodKind method, int max_refinements) {
  refine::IsrConfig config;
  config.max_refinements = max_refinements;
  switch (method) {
    case MethodKind::LlmDirect:
      config.max_refinements = 0;
      config.validator_kind = refine::ValidatorKind::External;
      break;
    case MethodKind::IsrSelf: config.validator_kind = refine::ValidatorKind::SelfLlm; break;
    case MethodKind::IsrExternal: config.validator_kind = refine::ValidatorKind::External; break;
  }
  return config;
}

BackendFactory default_factory(const BenchConfig& config, std::shared_ptr<const llm::Client> client) {
  // Resolve once up front so a bad planner name or a missing client fails
  // before any case runs.
  planners::make_backend(config.planner, 0, client);
  if (!client && (config.method == MethodKind::IsrSelf || config.translator == refine::TranslatorKind::Llm)) {
    throw Error(ErrorCode::ConfigError, std::string(display_name(config.method)) + " with the " +
                                            std::string(refine::to_string(config.translator)) +
                                            " translator needs an LLM client");
  }
  std::string planner = config.planner;
  return [planner, client](const domains::Instance& instance, std::size_t) {
    return refine::Backends{planners::make_backend(planner, instance.spec.seed, client), client};
  };
}

BenchResult run_bench(const BenchConfig& config, const BackendFactory& factory) {
  if (config.num_cases < 1) throw Error(ErrorCode::ConfigError, "num_cases must be at least 1");
  if (config.n < 1) throw Error(ErrorCode::ConfigError, "n must be at least 1");
  if (config.max_in_flight < 1) throw Error(ErrorCode::ConfigError, "max_in_flight must be at least 1");
  if (config.max_refinements < 0) throw Error(ErrorCode::ConfigError, "max_refinements must be >= 0");
  if (!factory) throw Error(ErrorCode::ConfigError, "no backend factory");

  std::vector<domains::Instance> instances;
  try {
    instances = domains::gen_batch(config.kind, config.n, config.base_seed, config.num_cases);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what(), e.code());
  }
  if (!config.transcripts_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(config.transcripts_dir, ec);
    if (ec) throw Error(ErrorCode::ConfigError, "cannot create " + config.transcripts_dir + ": " + ec.message());
  }

  refine::IsrConfig isr = method_config(config.method, config.max_refinements);
  isr.translator_kind = config.translator;
  isr.planner_kind = config.planner;

  auto started = std::chrono::steady_clock::now();
  std::vector<CaseResult> cases(instances.size());
  std::atomic<std::size_t> next{0};
  std::mutex io_mutex;
  std::string io_error;

  auto worker = [&] {
    for (std::size_t i = next++; i < instances.size(); i = next++) {
      const domains::Instance& instance = instances[i];
      CaseResult& result = cases[i];
      result.seed = instance.spec.seed;
      try {
        refine::Transcript t = refine::run_pipeline(instance, isr, factory(instance, i));
        result.iterations = t.records.size();
        result.success = config.method == MethodKind::IsrSelf ? t.final_check.value_or(false) : t.success();
        if (!result.success) {
          result.failure_reason = t.failure_reason.empty() ? "final plan fails the external check"
                                                           : t.failure_reason;
        }
        if (!config.transcripts_dir.empty()) {
          std::filesystem::path path =
              std::filesystem::path(config.transcripts_dir) / case_file_name(i, instance.spec.seed);
          std::ofstream out(path);
          out << json_io::to_json(t).dump(2) << '\n';
          if (!out) {
            std::lock_guard lock(io_mutex);
            if (io_error.empty()) io_error = "cannot write " + path.string();
          }
        }
      } catch (const std::exception& e) {
        result.success = false;
        result.failure_reason = e.what();
      }
    }
  };

  std::size_t threads = std::min(config.max_in_flight, instances.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (!io_error.empty()) throw Error(ErrorCode::Io, io_error);

  BenchResult out;
  out.config = config;
  out.cases = std::move(cases);
  out.successes = static_cast<std::size_t>(
      std::count_if(out.cases.begin(), out.cases.end(), [](const CaseResult& c) { return c.success; }));
  out.success_rate = static_cast<double>(out.successes) / static_cast<double>(out.cases.size());
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

TableFormat parse_table_format(std::string_view raw) {
  std::string name(raw);
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (name == "markdown" || name == "md") return TableFormat::Markdown;
  if (name == "csv") return TableFormat::Csv;
  if (name == "json") return TableFormat::Json;
  throw Error(ErrorCode::ConfigError, "unknown table format '" + std::string(name) + "' (markdown, csv or json)");
}

int rounded_percent(std::size_t successes, std::size_t cases) {
  if (cases == 0) return 0;
  return static_cast<int>((200 * successes + cases) / (2 * cases));
}

std::string emit_table(const std::vector<BenchResult>& results, TableFormat format, TableLayout layout) {
  if (results.empty()) throw Error(ErrorCode::InconsistentGrid, "no results");

  std::vector<std::string> groups;
  std::vector<int> translators;
  std::set<std::pair<int, int>> rows;  // (kind, n)
  std::map<std::pair<std::pair<int, int>, Column>, const BenchResult*> cells;
  for (const BenchResult& r : results) {
    if (r.cases.empty()) throw Error(ErrorCode::InconsistentGrid, "a result has no cases");
    if (std::find(groups.begin(), groups.end(), r.config.group) == groups.end()) groups.push_back(r.config.group);
    int translator = layout == TableLayout::ByTranslator ? static_cast<int>(r.config.translator) : 0;
    if (std::find(translators.begin(), translators.end(), translator) == translators.end()) {
      translators.push_back(translator);
    }
    std::pair<int, int> row{static_cast<int>(r.config.kind), r.config.n};
    rows.insert(row);
    Column col{r.config.group, translator, r.config.method};
    if (!cells.emplace(std::make_pair(row, col), &r).second) {
      throw Error(ErrorCode::InconsistentGrid, "duplicate cell for " +
                                                   std::string(domains::display_name(r.config.kind)) +
                                                   " (n=" + std::to_string(r.config.n) + ")");
    }
  }

  // Groups sort by name; the LLM translator comes before the reference one.
  std::sort(groups.begin(), groups.end());
  std::sort(translators.begin(), translators.end(), [](int a, int b) {
    return (a == static_cast<int>(refine::TranslatorKind::Llm)) > (b == static_cast<int>(refine::TranslatorKind::Llm));
  });
  std::vector<Column> columns;
  std::set<MethodKind> methods;
  for (const auto& entry : cells) methods.insert(entry.first.second.method);
  for (const std::string& g : groups) {
    for (int tr : translators) {
      for (MethodKind m : kAllMethods) {
        if (methods.contains(m)) columns.push_back(Column{g, tr, m});
      }
    }
  }
  auto column_label = [&](const Column& c) {
    std::string label = c.group.empty() ? "" : c.group + " ";
    if (layout == TableLayout::ByTranslator) {
      label += std::string(translator_label(static_cast<refine::TranslatorKind>(c.translator))) + " ";
    }
    return label + std::string(display_name(c.method));
  };
  auto row_label = [](const std::pair<int, int>& row) {
    return std::string(domains::display_name(static_cast<domains::TaskKind>(row.first))) + " (n=" +
           std::to_string(row.second) + ")";
  };

  struct Cell {
    const BenchResult* result;
    int percent;
  };
  std::vector<std::vector<Cell>> grid;
  for (const auto& row : rows) {
    std::vector<Cell> line;
    for (const Column& c : columns) {
      auto it = cells.find({row, c});
      if (it == cells.end()) {
        throw Error(ErrorCode::InconsistentGrid, "missing cell " + row_label(row) + " / " + column_label(c));
      }
      line.push_back(Cell{it->second, rounded_percent(it->second->successes, it->second->cases.size())});
    }
    grid.push_back(std::move(line));
  }

  std::string out;
  if (format == TableFormat::Markdown) {
    out = "| Domain |";
    for (const Column& c : columns) out += " " + column_label(c) + " |";
    out += "\n|---|";
    for (std::size_t i = 0; i < columns.size(); ++i) out += "---|";
    out += "\n";
    std::size_t r = 0;
    for (const auto& row : rows) {
      out += "| " + row_label(row) + " |";
      for (const Cell& cell : grid[r]) out += " " + std::to_string(cell.percent) + "\\% |";
      out += "\n";
      ++r;
    }
  } else if (format == TableFormat::Csv) {
    out = "Domain";
    for (const Column& c : columns) out += "," + csv_field(column_label(c));
    out += "\n";
    std::size_t r = 0;
    for (const auto& row : rows) {
      out += csv_field(row_label(row));
      for (const Cell& cell : grid[r]) out += "," + std::to_string(cell.percent) + "%";
      out += "\n";
      ++r;
    }
  } else {
    nlohmann::json doc;
    doc["columns"] = nlohmann::json::array();
    for (const Column& c : columns) doc["columns"].push_back(column_label(c));
    doc["rows"] = nlohmann::json::array();
    std::size_t r = 0;
    for (const auto& row : rows) {
      nlohmann::json cells_json = nlohmann::json::array();
      for (std::size_t k = 0; k < columns.size(); ++k) {
        const Cell& cell = grid[r][k];
        cells_json.push_back({{"column", column_label(columns[k])},
                              {"successes", cell.result->successes},
                              {"cases", cell.result->cases.size()},
                              {"percent", cell.percent},
                              {"text", std::to_string(cell.percent) + "%"}});
      }
      doc["rows"].push_back({{"label", row_label(row)},
                             {"kind", std::string(domains::to_string(static_cast<domains::TaskKind>(row.first)))},
                             {"n", row.second},
                             {"cells", cells_json}});
      ++r;
    }
    out = doc.dump(2) + "\n";
  }
  return out;
}

}  // namespace planloop::bench
