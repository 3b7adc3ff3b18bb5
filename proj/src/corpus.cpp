#include "planloop/corpus.hpp"

#include <algorithm>
#include <string>

#include "planloop/error.hpp"

namespace planloop::corpus {

std::optional<std::string_view> find(std::string_view path) {
  const auto& all = entries();
  auto it = std::lower_bound(all.begin(), all.end(), path,
                             [](const Entry& e, std::string_view p) { return e.path < p; });
  if (it == all.end() || it->path != path) return std::nullopt;
  return it->content;
}

std::string_view get(std::string_view path) {
  if (auto content = find(path)) return *content;
  throw Error(ErrorCode::Io, "no corpus entry '" + std::string(path) + "'");
}

}  // namespace planloop::corpus
