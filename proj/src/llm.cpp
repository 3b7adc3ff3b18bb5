#include "planloop/llm.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "planloop/error.hpp"

namespace planloop::llm {

using nlohmann::json;

namespace {

std::string excerpt(std::string_view body) {
  constexpr std::size_t kMax = 200;
  std::string out(body.substr(0, kMax));
  if (body.size() > kMax) out += "...";
  return out;
}

bool transient(int status) { return status == 429 || (status >= 500 && status <= 599); }

std::optional<std::string> env(const char* name) {
  const char* value = std::getenv(name);
  if (value == nullptr || *value == '\0') return std::nullopt;
  return std::string(value);
}

}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Live: return "live";
    case Mode::Record: return "record";
    case Mode::Replay: return "replay";
  }
  return "replay";
}

Mode parse_mode(std::string_view name) {
  std::string s;
  for (char c : name) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "live") return Mode::Live;
  if (s == "record") return Mode::Record;
  if (s == "replay") return Mode::Replay;
  throw Error(ErrorCode::ConfigError, "unknown LLM mode '" + std::string(name) + "' (live, record or replay)");
}

LlmConfig config_from_env(LlmConfig base) {
  if (auto v = env("PLANLOOP_API_BASE")) base.api_base = *v;
  if (auto v = env("PLANLOOP_API_KEY")) {
    base.api_key = *v;
  } else if (auto fallback = env("OPENAI_API_KEY")) {
    base.api_key = *fallback;
  }
  if (auto v = env("PLANLOOP_MODEL")) base.model = *v;
  if (auto v = env("PLANLOOP_LLM_MODE")) base.mode = parse_mode(*v);
  if (auto v = env("PLANLOOP_FIXTURES")) base.fixture_path = *v;
  return base;
}

void check_config(const LlmConfig& config) {
  if (config.temperature < 0) throw Error(ErrorCode::ConfigError, "temperature must be >= 0");
  if (config.retries < 0) throw Error(ErrorCode::ConfigError, "retries must be >= 0");
  if (config.mode != Mode::Live && config.fixture_path.empty()) {
    throw Error(ErrorCode::ConfigError,
                std::string(to_string(config.mode)) + " mode needs a fixture path (PLANLOOP_FIXTURES)");
  }
}

std::string request_digest(const std::vector<ChatMessage>& messages, const std::string& model) {
  json payload;
  payload["messages"] = json::array();
  for (const ChatMessage& m : messages) {
    payload["messages"].push_back({{"content", m.content}, {"role", std::string(to_string(m.role))}});
  }
  payload["model"] = model;
  std::string bytes = payload.dump();

  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::ConfigError, "SHA-256 unavailable");
  }
  static const char* const kHex = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xF];
  }
  return hex;
}

std::string request_body(const std::vector<ChatMessage>& messages, const LlmConfig& config) {
  json body;
  body["model"] = config.model;
  body["temperature"] = config.temperature;
  body["max_tokens"] = config.max_tokens;
  body["messages"] = json::array();
  for (const ChatMessage& m : messages) {
    body["messages"].push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
  }
  return body.dump();
}

std::string parse_completion(std::string_view body) {
  json parsed = json::parse(body, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    throw Error(ErrorCode::Transport, "malformed response body: " + excerpt(body));
  }
  const json* content = nullptr;
  if (auto choices = parsed.find("choices"); choices != parsed.end() && choices->is_array() &&
                                             !choices->empty()) {
    const json& first = (*choices)[0];
    if (auto message = first.find("message"); message != first.end() && message->is_object()) {
      if (auto c = message->find("content"); c != message->end() && c->is_string()) content = &*c;
    }
  }
  if (content == nullptr) throw Error(ErrorCode::EmptyResponse, "no choices[0].message.content");
  std::string text = content->get<std::string>();
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
    throw Error(ErrorCode::EmptyResponse, "blank completion");
  }
  return text;
}

ReplayStore::ReplayStore(std::string path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.contains("digest") || !record.contains("response") ||
        !record["digest"].is_string() || !record["response"].is_string()) {
      throw Error(ErrorCode::Io, path_ + ":" + std::to_string(number) + ": malformed replay record");
    }
    records_[record["digest"].get<std::string>()] = record["response"].get<std::string>();
  }
}

std::optional<std::string> ReplayStore::lookup(const std::string& digest) const {
  std::lock_guard lock(mutex_);
  auto it = records_.find(digest);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

void ReplayStore::append(const std::string& digest, const std::string& model,
                         const std::string& response) {
  std::lock_guard lock(mutex_);
  auto it = records_.find(digest);
  if (it != records_.end() && it->second == response) return;
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error(ErrorCode::Io, "cannot append to " + path_);
  json record = {{"digest", digest}, {"model", model}, {"response", response}};
  out << record.dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "write to " + path_ + " failed");
  records_[digest] = response;
}

std::size_t ReplayStore::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

Client::Client(LlmConfig config, std::shared_ptr<Transport> transport,
               std::shared_ptr<ReplayStore> store, Sleeper sleeper)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      store_(std::move(store)),
      sleeper_(std::move(sleeper)) {
  check_config(config_);
  if (config_.mode != Mode::Live && !store_) {
    throw Error(ErrorCode::ConfigError, "record and replay modes need a replay store");
  }
  if (config_.mode != Mode::Replay && !transport_) {
    throw Error(ErrorCode::ConfigError, "live and record modes need a transport");
  }
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string Client::complete(const std::vector<ChatMessage>& messages) const {
  if (config_.mode == Mode::Replay) {
    std::string digest = request_digest(messages, config_.model);
    if (auto hit = store_->lookup(digest)) return *hit;
    throw Error(ErrorCode::ReplayMiss, digest);
  }
  std::string response = call_live(messages);
  if (config_.mode == Mode::Record) {
    store_->append(request_digest(messages, config_.model), config_.model, response);
  }
  return response;
}

std::string Client::call_live(const std::vector<ChatMessage>& messages) const {
  HttpRequest request{config_.api_base, "/chat/completions", request_body(messages, config_),
                      config_.api_key, config_.timeout};
  int last_status = 0;
  std::string last_error;
  const int attempts = 1 + config_.retries;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0 && !config_.backoff.empty()) {
      std::size_t k = std::min(static_cast<std::size_t>(attempt - 1), config_.backoff.size() - 1);
      sleeper_(config_.backoff[k]);
    }
    HttpResponse response;
    try {
      response = transport_->post(request);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Transport) throw;
      last_status = 0;
      last_error = e.detail();
      continue;
    }
    if (response.status >= 200 && response.status < 300) return parse_completion(response.body);
    last_status = response.status;
    last_error = "HTTP " + std::to_string(response.status) + ": " + excerpt(response.body);
    if (!transient(response.status)) throw Error(ErrorCode::Transport, last_error);
  }
  std::string summary = last_error + " (after " + std::to_string(attempts) + " attempt(s))";
  if (last_status == 429) throw Error(ErrorCode::RateLimited, summary);
  throw Error(ErrorCode::Transport, summary);
}

std::shared_ptr<Client> make_client(const LlmConfig& config) {
  check_config(config);
  std::shared_ptr<ReplayStore> store;
  if (!config.fixture_path.empty()) store = std::make_shared<ReplayStore>(config.fixture_path);
  std::shared_ptr<Transport> transport;
  if (config.mode != Mode::Replay) transport = std::make_shared<HttpTransport>();
  return std::make_shared<Client>(config, std::move(transport), std::move(store));
}

}  // namespace planloop::llm
