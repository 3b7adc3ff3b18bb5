#pragma once

// Batch runs over generated instances and the success-rate tables.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "planloop/domains.hpp"
#include "planloop/refine.hpp"

namespace planloop::bench {

enum class MethodKind { LlmDirect, IsrSelf, IsrExternal };

inline constexpr MethodKind kAllMethods[] = {MethodKind::LlmDirect, MethodKind::IsrSelf,
                                             MethodKind::IsrExternal};

/// "llm-direct", "isr-self", "isr-external".
std::string_view to_string(MethodKind method);
/// "LLM-direct", "ISR-LLM-self", "ISR-LLM-external".
std::string_view display_name(MethodKind method);
/// Throws ConfigError.
MethodKind parse_method(std::string_view name);

/// LlmDirect: no refinements, external check. IsrSelf: self-validator.
/// IsrExternal: external validator.
refine::IsrConfig method_config(MethodKind method, int max_refinements = 10);

struct BenchConfig {
  domains::TaskKind kind = domains::TaskKind::Cooking;
  int n = 3;
  int num_cases = 30;
  std::uint64_t base_seed = 0;
  MethodKind method = MethodKind::IsrExternal;
  refine::TranslatorKind translator = refine::TranslatorKind::Reference;
  std::string planner = "oracle";
  int max_refinements = 10;
  /// Column group in tables, e.g. the model name.
  std::string group;
  std::size_t max_in_flight = 1;
  /// When set, one transcript JSON per case is written here.
  std::string transcripts_dir;
};

struct CaseResult {
  std::uint64_t seed = 0;
  bool success = false;
  std::size_t iterations = 0;
  std::string failure_reason;
};

struct BenchResult {
  BenchConfig config;
  std::vector<CaseResult> cases;
  std::size_t successes = 0;
  double success_rate = 0.0;
  double wall_seconds = 0.0;
};

/// Backends for one case. Called once per case, possibly concurrently.
using BackendFactory =
    std::function<refine::Backends(const domains::Instance& instance, std::size_t case_index)>;

/// Backends from make_backend(config.planner, instance seed, client).
/// Throws ConfigError for an unknown planner, or when the planner, the
/// translator or the self-validator needs a client and none is given.
BackendFactory default_factory(const BenchConfig& config,
                               std::shared_ptr<const llm::Client> client);

/// Throws ConfigError before running anything. A case whose pipeline fails
/// counts as unsuccessful. Cases run concurrently up to max_in_flight and
/// are aggregated by case index. Success for the self-validator method is
/// the transcript's external final_check.
BenchResult run_bench(const BenchConfig& config, const BackendFactory& factory);

enum class TableFormat { Markdown, Csv, Json };
/// Rows are family and n. Columns are methods, or translator and method
/// pairs, prefixed by the group when set. Groups are ordered by name, so
/// input order never matters.
enum class TableLayout { ByMethod, ByTranslator };

/// Throws ConfigError.
TableFormat parse_table_format(std::string_view name);

/// floor(100 * successes / cases + 1/2) computed on integers.
int rounded_percent(std::size_t successes, std::size_t cases);

/// Throws InconsistentGrid for an empty list, a duplicate cell or a missing
/// cell.
std::string emit_table(const std::vector<BenchResult>& results, TableFormat format,
                       TableLayout layout = TableLayout::ByMethod);

}  // namespace planloop::bench
