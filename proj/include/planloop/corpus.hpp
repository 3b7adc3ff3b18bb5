#pragma once

// Read-only access to the fixture corpus compiled into the library: appendix
// PDDL files and the few-shot prompt examples, keyed by their path below the
// fixtures directory (e.g. "prompts/planner/cooking/example1.answer.txt").

#include <optional>
#include <string_view>
#include <vector>

namespace planloop::corpus {

struct Entry {
  std::string_view path;
  std::string_view content;
};

/// Sorted by path.
const std::vector<Entry>& entries();

std::optional<std::string_view> find(std::string_view path);

/// Throws Error(Io) when the path is not in the corpus.
std::string_view get(std::string_view path);

}  // namespace planloop::corpus
