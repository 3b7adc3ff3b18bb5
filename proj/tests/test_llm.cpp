#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <thread>

#include <httplib.h>

#include "planloop/error.hpp"
#include "planloop/llm.hpp"
#include "support.hpp"

using namespace planloop;
using namespace planloop::llm;
using namespace std::chrono_literals;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::Io;
}

// Fails the test on any network use.
class ForbiddenTransport : public Transport {
 public:
  HttpResponse post(const HttpRequest&) override {
    FAIL("network contacted in replay mode");
    return {};
  }
};

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& name)
      : path(std::filesystem::temp_directory_path() /
             ("planloop_" + name + "_" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())))) {
    std::filesystem::remove(path);
  }
  ~TempFile() { std::filesystem::remove(path); }
};

std::vector<ChatMessage> sample_messages() {
  return {{Role::System, "You are a planner."}, {Role::User, "Line \"one\"\n\xc3\xa9t\xc3\xa9"}};
}

LlmConfig replay_config(const std::string& path) {
  LlmConfig c;
  c.mode = Mode::Replay;
  c.fixture_path = path;
  return c;
}

}  // namespace

TEST_CASE("request digest is SHA-256 of the pinned serialization") {
  // Computed independently from the byte string
  // {"messages":[{"content":"You are a planner.","role":"system"},{"content":"Line \"one\"\nété","role":"user"}],"model":"gpt-4"}
  // with the \u escapes written as raw UTF-8.
  CHECK(request_digest(sample_messages(), "gpt-4") ==
        "6fbe0d731ae95b7dc35c4eb9b14f6ba51868e94fca7029c7881bc345fc0d8d1a");
  CHECK(request_digest(sample_messages(), "gpt-3.5-turbo") != request_digest(sample_messages(), "gpt-4"));
  auto swapped = sample_messages();
  swapped[1].role = Role::Assistant;
  CHECK(request_digest(swapped, "gpt-4") != request_digest(sample_messages(), "gpt-4"));
  CHECK(request_digest({}, "gpt-4").size() == 64);
}

TEST_CASE("request body has the chat-completions shape") {
  LlmConfig c;
  c.model = "gpt-3.5-turbo";
  c.max_tokens = 100;
  auto body = nlohmann::json::parse(request_body(sample_messages(), c));
  CHECK(body["model"] == "gpt-3.5-turbo");
  CHECK(body["temperature"] == 0.0);
  CHECK(body["max_tokens"] == 100);
  REQUIRE(body["messages"].size() == 2);
  CHECK(body["messages"][0]["role"] == "system");
  CHECK(body["messages"][1]["content"] == sample_messages()[1].content);
}

TEST_CASE("parse_completion") {
  CHECK(parse_completion(testing::completion_body("(pick ingredient1)")) == "(pick ingredient1)");
  CHECK(code_of([] { parse_completion("not json"); }) == ErrorCode::Transport);
  CHECK(code_of([] { parse_completion("[]"); }) == ErrorCode::Transport);
  CHECK(code_of([] { parse_completion(R"({"choices":[]})"); }) == ErrorCode::EmptyResponse);
  CHECK(code_of([] { parse_completion(R"({"choices":[{"message":{}}]})"); }) == ErrorCode::EmptyResponse);
  CHECK(code_of([] { parse_completion(testing::completion_body("  \n")); }) == ErrorCode::EmptyResponse);
}

TEST_CASE("config validation and modes") {
  CHECK(parse_mode("Replay") == Mode::Replay);
  CHECK(parse_mode("live") == Mode::Live);
  CHECK(code_of([] { parse_mode("offline"); }) == ErrorCode::ConfigError);

  LlmConfig c;
  c.mode = Mode::Live;
  CHECK_NOTHROW(check_config(c));
  c.temperature = -0.1;
  CHECK(code_of([&] { check_config(c); }) == ErrorCode::ConfigError);
  c.temperature = 0;
  c.retries = -1;
  CHECK(code_of([&] { check_config(c); }) == ErrorCode::ConfigError);
  c.retries = 0;
  c.mode = Mode::Record;
  CHECK(code_of([&] { check_config(c); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { Client(LlmConfig{}, nullptr, nullptr); }) == ErrorCode::ConfigError);
}

TEST_CASE("config_from_env overlays the environment") {
  setenv("PLANLOOP_API_BASE", "http://localhost:9/v1", 1);
  unsetenv("PLANLOOP_API_KEY");
  setenv("OPENAI_API_KEY", "fallback-key", 1);
  setenv("PLANLOOP_MODEL", "gpt-3.5-turbo", 1);
  setenv("PLANLOOP_LLM_MODE", "record", 1);
  setenv("PLANLOOP_FIXTURES", "/tmp/x.jsonl", 1);
  LlmConfig c = config_from_env();
  CHECK(c.api_base == "http://localhost:9/v1");
  CHECK(c.api_key == "fallback-key");
  CHECK(c.model == "gpt-3.5-turbo");
  CHECK(c.mode == Mode::Record);
  CHECK(c.fixture_path == "/tmp/x.jsonl");
  setenv("PLANLOOP_API_KEY", "primary-key", 1);
  CHECK(config_from_env().api_key == "primary-key");
  for (const char* name : {"PLANLOOP_API_BASE", "PLANLOOP_API_KEY", "OPENAI_API_KEY", "PLANLOOP_MODEL",
                           "PLANLOOP_LLM_MODE", "PLANLOOP_FIXTURES"}) {
    unsetenv(name);
  }
  LlmConfig defaults = config_from_env();
  CHECK(defaults.mode == Mode::Replay);
  CHECK(defaults.temperature == 0.0);
}

TEST_CASE("retries follow the backoff schedule and stop at the bound") {
  auto transport = std::make_shared<testing::ScriptedTransport>();
  transport->push(503, "busy");
  transport->push(500, "oops");
  transport->push_completion("done");
  LlmConfig c;
  c.mode = Mode::Live;
  c.retries = 3;
  c.backoff = {10ms, 20ms};
  std::vector<std::chrono::milliseconds> slept;
  Client client(c, transport, nullptr, [&](std::chrono::milliseconds d) { slept.push_back(d); });
  CHECK(client.complete(sample_messages()) == "done");
  CHECK(transport->requests.size() == 3);
  CHECK(slept == std::vector<std::chrono::milliseconds>{10ms, 20ms});

  // Always failing: exactly 1 + retries attempts.
  transport->requests.clear();
  slept.clear();
  for (int i = 0; i < 10; ++i) transport->push(429, "slow down");
  CHECK(code_of([&] { client.complete(sample_messages()); }) == ErrorCode::RateLimited);
  CHECK(transport->requests.size() == 4);
  CHECK(slept == std::vector<std::chrono::milliseconds>{10ms, 20ms, 20ms});
}

TEST_CASE("transport failures") {
  auto transport = std::make_shared<testing::ScriptedTransport>();
  auto client = testing::live_client(transport, 2);
  // No response at all, every time.
  CHECK(code_of([&] { client->complete(sample_messages()); }) == ErrorCode::Transport);
  CHECK(transport->requests.size() == 3);

  // A client error is not retried.
  transport->requests.clear();
  transport->push(401, "bad key");
  try {
    client->complete(sample_messages());
    FAIL("expected a failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Transport);
    CHECK(e.detail().find("401") != std::string::npos);
    CHECK(e.detail().find("bad key") != std::string::npos);
  }
  CHECK(transport->requests.size() == 1);

  // 5xx then 429 exhausting retries reports the last status.
  transport->push(500, "x");
  transport->push(500, "x");
  transport->push(429, "x");
  CHECK(code_of([&] { client->complete(sample_messages()); }) == ErrorCode::RateLimited);
  transport->push(429, "x");
  transport->push(429, "x");
  transport->push(502, "x");
  CHECK(code_of([&] { client->complete(sample_messages()); }) == ErrorCode::Transport);

  transport->push_completion(" ");
  CHECK(code_of([&] { client->complete(sample_messages()); }) == ErrorCode::EmptyResponse);
}

TEST_CASE("record then replay without touching the network") {
  TempFile file("record");
  auto transport = std::make_shared<testing::ScriptedTransport>();
  transport->push_completion("(pick ingredient1)");
  LlmConfig rc;
  rc.mode = Mode::Record;
  rc.fixture_path = file.path.string();
  auto store = std::make_shared<ReplayStore>(rc.fixture_path);
  Client recorder(rc, transport, store, [](std::chrono::milliseconds) {});
  CHECK(recorder.complete(sample_messages()) == "(pick ingredient1)");
  CHECK(store->size() == 1);

  std::ifstream in(file.path);
  std::string line;
  REQUIRE(std::getline(in, line));
  auto record = nlohmann::json::parse(line);
  CHECK(record["digest"] == request_digest(sample_messages(), rc.model));
  CHECK(record["model"] == rc.model);
  CHECK(record["response"] == "(pick ingredient1)");
  CHECK_FALSE(std::getline(in, line));

  // A fresh store reads the file back; replay never uses the transport.
  LlmConfig pc = replay_config(file.path.string());
  Client player(pc, std::make_shared<ForbiddenTransport>(), std::make_shared<ReplayStore>(pc.fixture_path));
  CHECK(player.complete(sample_messages()) == "(pick ingredient1)");
  auto other = sample_messages();
  other.push_back({Role::User, "again"});
  try {
    player.complete(other);
    FAIL("expected a miss");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ReplayMiss);
    CHECK(e.detail() == request_digest(other, pc.model));
  }
}

TEST_CASE("replay store files") {
  TempFile file("store");
  {
    ReplayStore empty(file.path.string());
    CHECK(empty.size() == 0);
    empty.append("d1", "m", "r1");
    empty.append("d1", "m", "r1");
    empty.append("d2", "m", "line\nbreak");
  }
  ReplayStore loaded(file.path.string());
  CHECK(loaded.size() == 2);
  CHECK(loaded.lookup("d2") == std::optional<std::string>("line\nbreak"));
  CHECK_FALSE(loaded.lookup("d3").has_value());
  {
    std::ofstream out(file.path, std::ios::app);
    out << "{\"digest\": 5}\n";
  }
  CHECK(code_of([&] { ReplayStore broken(file.path.string()); }) == ErrorCode::Io);

  TempFile blank("blank");
  {
    std::ofstream out(blank.path);
    out << "\n  \n";
  }
  CHECK(ReplayStore(blank.path.string()).size() == 0);
}

TEST_CASE("concurrent replay lookups") {
  TempFile file("concurrent");
  auto store = std::make_shared<ReplayStore>(file.path.string());
  for (int i = 0; i < 50; ++i) store->append("d" + std::to_string(i), "m", "r" + std::to_string(i));
  std::vector<std::thread> threads;
  std::atomic<int> hits{0};
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 50; ++i) {
        if (store->lookup("d" + std::to_string(i)) == "r" + std::to_string(i)) ++hits;
      }
    });
  }
  for (auto& t : threads) t.join();
  CHECK(hits == 200);
}

TEST_CASE("http transport against a local server") {
  httplib::Server server;
  std::string seen_auth;
  std::string seen_body;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_body = req.body;
    res.set_content(testing::completion_body("(pickup b1)"), "application/json");
  });
  server.Post("/busy/chat/completions", [](const httplib::Request&, httplib::Response& res) {
    res.status = 503;
    res.set_content("try later", "text/plain");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  LlmConfig c;
  c.mode = Mode::Live;
  c.api_base = "http://127.0.0.1:" + std::to_string(port) + "/v1/";
  c.api_key = "secret";
  c.timeout = 5000ms;
  c.retries = 1;
  Client client(c, std::make_shared<HttpTransport>(), nullptr, [](std::chrono::milliseconds) {});
  CHECK(client.complete(sample_messages()) == "(pickup b1)");
  CHECK(seen_auth == "Bearer secret");
  CHECK(seen_body == request_body(sample_messages(), c));

  HttpTransport raw;
  HttpResponse busy = raw.post({"http://127.0.0.1:" + std::to_string(port) + "/busy", "/chat/completions", "{}", "",
                                5000ms});
  CHECK(busy.status == 503);
  CHECK(busy.body == "try later");

  server.stop();
  thread.join();

  // Nothing listens any more.
  CHECK(code_of([&] { client.complete(sample_messages()); }) == ErrorCode::Transport);
  CHECK(code_of([&] { raw.post({"not a url", "/x", "{}", "", 1000ms}); }) == ErrorCode::Transport);
}
