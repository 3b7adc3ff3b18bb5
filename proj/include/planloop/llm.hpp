#pragma once

// Chat-completion client with record/replay fixtures. Every call goes through
// a Transport, so tests can swap the network for a fake.

#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace planloop::llm {

enum class Role { System, User, Assistant };

std::string_view to_string(Role role);

struct ChatMessage {
  Role role = Role::User;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

enum class Mode { Live, Record, Replay };

std::string_view to_string(Mode mode);
/// "live", "record", "replay". Throws ConfigError.
Mode parse_mode(std::string_view name);

struct LlmConfig {
  std::string api_base = "https://api.openai.com/v1";
  std::string api_key;
  std::string model = "gpt-4";
  double temperature = 0.0;
  int max_tokens = 2048;
  std::chrono::milliseconds timeout{120000};
  int retries = 3;
  /// Delay before retry k is backoff[min(k, size-1)].
  std::vector<std::chrono::milliseconds> backoff{std::chrono::milliseconds(1000),
                                                 std::chrono::milliseconds(4000),
                                                 std::chrono::milliseconds(16000)};
  Mode mode = Mode::Replay;
  std::string fixture_path;
};

/// Overlays PLANLOOP_API_BASE, PLANLOOP_API_KEY (or OPENAI_API_KEY),
/// PLANLOOP_MODEL, PLANLOOP_LLM_MODE and PLANLOOP_FIXTURES on `base`.
LlmConfig config_from_env(LlmConfig base = {});

/// Throws ConfigError on a negative temperature or retry count, or on a
/// Record/Replay config without a fixture path.
void check_config(const LlmConfig& config);

/// Lowercase hex SHA-256 of the compact JSON
/// {"messages":[{"content":...,"role":...},...],"model":...}.
std::string request_digest(const std::vector<ChatMessage>& messages, const std::string& model);

/// The chat-completions request body.
std::string request_body(const std::vector<ChatMessage>& messages, const LlmConfig& config);

/// Extracts choices[0].message.content. Throws Transport on malformed JSON
/// and EmptyResponse when the content is missing or blank.
std::string parse_completion(std::string_view body);

struct HttpRequest {
  std::string api_base;
  std::string path;
  std::string body;
  std::string api_key;
  std::chrono::milliseconds timeout{0};
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

class Transport {
 public:
  virtual ~Transport() = default;
  /// Returns any HTTP status. Throws Error(Transport) when no response
  /// arrives at all.
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

/// cpp-httplib, with TLS for https bases.
class HttpTransport : public Transport {
 public:
  HttpResponse post(const HttpRequest& request) override;
};

/// Append-only JSONL store of {digest, model, response} records. Concurrent
/// lookups are safe; appends are serialized and flushed per record.
class ReplayStore {
 public:
  /// Loads existing records; a missing file is an empty store.
  explicit ReplayStore(std::string path);

  std::optional<std::string> lookup(const std::string& digest) const;
  void append(const std::string& digest, const std::string& model, const std::string& response);
  std::size_t size() const;
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  mutable std::mutex mutex_;
  std::map<std::string, std::string> records_;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

class Client {
 public:
  Client(LlmConfig config, std::shared_ptr<Transport> transport,
         std::shared_ptr<ReplayStore> store, Sleeper sleeper = {});

  /// Live: POST with retries on connection errors, 429 and 5xx. Record: live
  /// call, then append. Replay: store lookup only; throws ReplayMiss.
  std::string complete(const std::vector<ChatMessage>& messages) const;

  const LlmConfig& config() const { return config_; }

 private:
  std::string call_live(const std::vector<ChatMessage>& messages) const;

  LlmConfig config_;
  std::shared_ptr<Transport> transport_;
  std::shared_ptr<ReplayStore> store_;
  Sleeper sleeper_;
};

/// HttpTransport plus the configured fixture store.
std::shared_ptr<Client> make_client(const LlmConfig& config);

}  // namespace planloop::llm
