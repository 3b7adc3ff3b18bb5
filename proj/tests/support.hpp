#pragma once

// Shared helpers for the unit suites: fixture access and small generators.

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <deque>
#include <vector>

#include <json.hpp>

#include "planloop/corpus.hpp"
#include "planloop/domains.hpp"
#include "planloop/error.hpp"
#include "planloop/llm.hpp"
#include "planloop/world.hpp"

namespace testing {

inline std::string fixture_path(const std::string& rel) { return std::string(PLANLOOP_FIXTURE_DIR) + "/" + rel; }

inline std::string read_fixture(const std::string& rel) {
  std::ifstream in(fixture_path(rel), std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + rel);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline std::string domain_text(const std::string& kind) {
  return std::string(planloop::corpus::get("pddl/" + kind + "/example1.domain.pddl"));
}

inline planloop::world::Model fixture_model(const std::string& kind, const std::string& problem_rel) {
  return planloop::world::load_model(domain_text(kind), read_fixture(problem_rel));
}

inline const std::vector<std::string>& kinds() {
  static const std::vector<std::string> k = {"cooking", "blocksworld", "ballmoving"};
  return k;
}

inline planloop::domains::TaskKind kind_of(const std::string& name) { return planloop::domains::parse_task_kind(name); }

// A deterministic stream of generated instances across families and sizes.
inline std::vector<planloop::domains::Instance> sample_instances(std::size_t count, std::uint64_t seed,
                                                                 int min_n = 1, int max_n = 5) {
  std::mt19937_64 rng(seed);
  std::vector<planloop::domains::Instance> out;
  for (std::size_t i = 0; i < count; ++i) {
    auto kind = planloop::domains::kAllKinds[rng() % 3];
    int n = min_n + static_cast<int>(rng() % static_cast<std::uint64_t>(max_n - min_n + 1));
    out.push_back(planloop::domains::gen_instance({kind, n, rng() % 100000}));
  }
  return out;
}

inline planloop::world::Model model_of(const planloop::domains::Instance& instance) {
  return planloop::world::load_model(instance.domain_text, instance.problem_text);
}

// A chat-completions body whose first choice says `content`.
inline std::string completion_body(const std::string& content) {
  nlohmann::json j = {{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}};
  return j.dump();
}

// Plays back queued responses in order and records every request. An empty
// queue means the connection fails.
class ScriptedTransport : public planloop::llm::Transport {
 public:
  void push(int status, std::string body) { queue_.push_back({status, std::move(body)}); }
  void push_completion(const std::string& content) { push(200, completion_body(content)); }

  planloop::llm::HttpResponse post(const planloop::llm::HttpRequest& request) override {
    requests.push_back(request);
    if (queue_.empty()) throw planloop::Error(planloop::ErrorCode::Transport, "connection refused");
    planloop::llm::HttpResponse r = queue_.front();
    queue_.pop_front();
    return r;
  }

  std::vector<planloop::llm::HttpRequest> requests;

 private:
  std::deque<planloop::llm::HttpResponse> queue_;
};

// A live client over `transport` that never sleeps.
inline std::shared_ptr<planloop::llm::Client> live_client(std::shared_ptr<planloop::llm::Transport> transport,
                                                          int retries = 0) {
  planloop::llm::LlmConfig config;
  config.mode = planloop::llm::Mode::Live;
  config.retries = retries;
  return std::make_shared<planloop::llm::Client>(config, std::move(transport), nullptr,
                                                 [](std::chrono::milliseconds) {});
}

}  // namespace testing
