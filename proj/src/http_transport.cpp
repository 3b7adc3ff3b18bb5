#include <httplib.h>

#include "planloop/error.hpp"
#include "planloop/llm.hpp"

namespace planloop::llm {

HttpResponse HttpTransport::post(const HttpRequest& request) {
  // "https://host:port/v1" -> client base "https://host:port", path prefix "/v1".
  std::string base = request.api_base;
  std::string prefix;
  std::size_t scheme = base.find("://");
  std::size_t slash = base.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (slash != std::string::npos) {
    prefix = base.substr(slash);
    base.resize(slash);
  }
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

  httplib::Client client(base);
  if (!client.is_valid()) throw Error(ErrorCode::Transport, "invalid API base '" + request.api_base + "'");
  auto seconds = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
  auto micros = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());
  httplib::Headers headers;
  if (!request.api_key.empty()) headers.emplace("Authorization", "Bearer " + request.api_key);

  auto result = client.Post(prefix + request.path, headers, request.body, "application/json");
  if (!result) {
    throw Error(ErrorCode::Transport, "request to " + request.api_base + " failed: " +
                                          httplib::to_string(result.error()));
  }
  return HttpResponse{result->status, result->body};
}

}  // namespace planloop::llm
