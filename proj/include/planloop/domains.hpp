#pragma once

// Benchmark instances for the cooking, blocksworld and ball-moving families:
// seeded generation, natural-language questions, the canonical PDDL texts and
// a deterministic translator from those questions back to PDDL.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "planloop/pddl.hpp"
#include "planloop/world.hpp"

namespace planloop::domains {

enum class TaskKind { Cooking, Blocksworld, BallMoving };

inline constexpr TaskKind kAllKinds[] = {TaskKind::Cooking, TaskKind::Blocksworld,
                                         TaskKind::BallMoving};

/// "cooking", "blocksworld", "ballmoving".
std::string_view to_string(TaskKind kind);
/// "Cooking", "Blocksworld", "Ball Moving".
std::string_view display_name(TaskKind kind);
/// Accepts the names above plus "ball-moving" and "ball_moving", any case.
/// Throws UnknownTaskKind.
TaskKind parse_task_kind(std::string_view name);
/// By domain name.
std::optional<TaskKind> detect_kind(const pddl::DomainDef& domain);

inline constexpr int kIngredients = 6;
inline constexpr int kRooms = 4;
/// The forest sampler's exact counts fit 128 bits up to this size.
inline constexpr int kMaxBlocks = 30;

struct InstanceSpec {
  TaskKind kind = TaskKind::Cooking;
  int n = 3;
  std::uint64_t seed = 0;

  bool operator==(const InstanceSpec&) const = default;
};

/// recipes[p] lists the 1-based ingredient numbers pot p+1 needs, ascending.
struct CookingMeta {
  std::vector<std::vector<int>> recipes;
  bool operator==(const CookingMeta&) const = default;
};

/// Towers list 1-based block numbers bottom to top. Towers are ordered by
/// their bottom block.
struct BlocksMeta {
  std::vector<std::vector<int>> towers;
  std::vector<int> goal_tower;
  bool operator==(const BlocksMeta&) const = default;
};

/// 1-based room numbers.
struct BallMeta {
  int robot_room = 1;
  std::vector<int> start_rooms;
  std::vector<int> goal_rooms;
  bool operator==(const BallMeta&) const = default;
};

using InstanceMeta = std::variant<CookingMeta, BlocksMeta, BallMeta>;

struct Instance {
  InstanceSpec spec;
  std::string nl_text;
  std::string domain_text;
  std::string problem_text;
  InstanceMeta meta;
};

/// The generator's random source: std::mt19937_64 seeded with the instance seed.
/// Integers come from rejection sampling on raw 64-bit outputs, so the
/// stream is identical on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform in [lo, hi].
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi);
  /// Uniform in [0, bound) for a 128-bit bound.
  unsigned __int128 uniform128(unsigned __int128 bound);
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Throws InvalidSpec when n < 1 (or n > kMaxBlocks for blocksworld).
Instance gen_instance(const InstanceSpec& spec);

/// Builds the instance texts from an explicit layout. Throws InvalidSpec on
/// inconsistent layouts.
Instance make_instance(const InstanceSpec& spec, const InstanceMeta& meta);

/// `count` pairwise distinct instances. Candidate seeds run base, base+1, ...
/// and duplicates are skipped, so each instance's spec.seed records the seed
/// that produced it.
std::vector<Instance> gen_batch(TaskKind kind, int n, std::uint64_t base_seed, int count);

std::string render_nl(const Instance& instance);
std::string render_nl(const InstanceMeta& meta);

struct Translation {
  TaskKind kind = TaskKind::Cooking;
  pddl::DomainDef domain;
  pddl::ProblemDef problem;
};

/// Inverse of render_nl. Throws TemplateMismatch.
Translation reference_translate(std::string_view nl_text);

/// Guesses the family of a question from its opening sentence.
std::optional<TaskKind> detect_question_kind(std::string_view nl_text);

const pddl::DomainDef& canonical_domain(TaskKind kind);
/// print_domain(canonical_domain(kind)).
const std::string& canonical_domain_text(TaskKind kind);

pddl::ProblemDef make_problem(TaskKind kind, const InstanceMeta& meta);

/// "three", "four", ... used in problem names such as "threeblocks".
std::string number_word(int n);

/// Adds (unused ?i) and guards pick with it. Throws NotCookingDomain or
/// AlreadyEnriched.
pddl::DomainDef enrich_cooking_domain(const pddl::DomainDef& domain);
/// Adds (unused ingredientK) for every ingredient object.
pddl::ProblemDef enrich_cooking_problem(const pddl::ProblemDef& problem);
world::Model enrich_cooking(const world::Model& model);

}  // namespace planloop::domains
