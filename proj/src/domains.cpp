#include "planloop/domains.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <limits>
#include <map>
#include <numeric>
#include <regex>
#include <set>

#include "planloop/corpus.hpp"
#include "planloop/error.hpp"

namespace planloop::domains {

namespace {

using u128 = unsigned __int128;

[[noreturn]] void invalid_spec(const std::string& message) {
  throw Error(ErrorCode::InvalidSpec, message);
}

[[noreturn]] void mismatch(const std::string& message) {
  throw Error(ErrorCode::TemplateMismatch, message);
}

pddl::Atom atom(std::string predicate, std::vector<std::string> args) {
  pddl::Atom a{std::move(predicate), {}};
  for (std::string& s : args) a.args.push_back(pddl::Term{std::move(s), false});
  return a;
}

pddl::TypedName object(std::string name, std::string type = std::string(pddl::kObjectType)) {
  return pddl::TypedName{std::move(name), std::move(type), false};
}

std::string ingredient(int k) { return "ingredient" + std::to_string(k); }
std::string pot(int k) { return "pot" + std::to_string(k); }
std::string block(int k) { return "b" + std::to_string(k); }
std::string room(int k) { return "room" + std::to_string(k); }
std::string ball(int k) { return "ball" + std::to_string(k); }

// "a"; "a and b"; "a, b, and c".
std::string english_list(const std::vector<std::string>& items) {
  if (items.size() == 1) return items[0];
  if (items.size() == 2) return items[0] + " and " + items[1];
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i + 1 == items.size()) {
      out += "and " + items[i];
    } else {
      out += items[i] + ", ";
    }
  }
  return out;
}

std::string plural(int count, const std::string& noun) {
  return std::to_string(count) + " " + noun + (count == 1 ? "" : "s");
}

// Fisher-Yates over 1..n.
std::vector<int> permutation(Rng& rng, int n) {
  std::vector<int> out(static_cast<std::size_t>(n));
  std::iota(out.begin(), out.end(), 1);
  for (std::size_t i = out.size(); i > 1; --i) {
    std::size_t j = rng.uniform(0, i - 1);
    std::swap(out[i - 1], out[j]);
  }
  return out;
}

// Uniform subset of {1..n} of the given size, ascending.
std::vector<int> subset(Rng& rng, int n, int size) {
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 1);
  for (int i = 0; i < size; ++i) {
    std::size_t j = rng.uniform(static_cast<std::uint64_t>(i), pool.size() - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(size));
  std::sort(pool.begin(), pool.end());
  return pool;
}

// Number of ways to arrange n labelled blocks into k unordered non-empty
// towers: C(n-1, k-1) * n! / k!.
u128 forests_with_towers(int n, int k) {
  u128 falling = 1;  // n! / k!
  for (int i = k + 1; i <= n; ++i) falling *= static_cast<u128>(i);
  u128 choose = 1;  // C(n-1, k-1)
  for (int i = 1; i <= k - 1; ++i) {
    choose = choose * static_cast<u128>(n - k + i) / static_cast<u128>(i);
  }
  return choose * falling;
}

std::vector<std::vector<int>> sample_forest(Rng& rng, int n) {
  std::vector<u128> weights;
  u128 total = 0;
  for (int k = 1; k <= n; ++k) {
    weights.push_back(forests_with_towers(n, k));
    total += weights.back();
  }
  u128 r = rng.uniform128(total);
  int towers = 1;
  for (u128 w : weights) {
    if (r < w) break;
    r -= w;
    ++towers;
  }
  std::vector<int> order = permutation(rng, n);
  std::vector<int> cuts = subset(rng, n - 1, towers - 1);
  std::vector<std::vector<int>> out;
  std::size_t start = 0;
  cuts.push_back(n);
  for (int cut : cuts) {
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + cut);
    start = static_cast<std::size_t>(cut);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void check_meta(TaskKind kind, int n, const InstanceMeta& meta) {
  if (n < 1) invalid_spec("n must be at least 1, got " + std::to_string(n));
  switch (kind) {
    case TaskKind::Cooking: {
      const auto* m = std::get_if<CookingMeta>(&meta);
      if (!m) invalid_spec("cooking instance needs recipes");
      if (static_cast<int>(m->recipes.size()) != n) invalid_spec("one recipe per pot expected");
      for (const auto& recipe : m->recipes) {
        std::set<int> seen;
        for (int i : recipe) {
          if (i < 1 || i > kIngredients || !seen.insert(i).second) {
            invalid_spec("bad ingredient number " + std::to_string(i));
          }
        }
        if (!std::is_sorted(recipe.begin(), recipe.end())) invalid_spec("recipe not ascending");
      }
      break;
    }
    case TaskKind::Blocksworld: {
      const auto* m = std::get_if<BlocksMeta>(&meta);
      if (!m) invalid_spec("blocksworld instance needs towers");
      if (n > kMaxBlocks) invalid_spec("at most " + std::to_string(kMaxBlocks) + " blocks");
      std::vector<int> all;
      for (const auto& t : m->towers) {
        if (t.empty()) invalid_spec("empty tower");
        all.insert(all.end(), t.begin(), t.end());
      }
      std::vector<int> goal = m->goal_tower;
      std::sort(all.begin(), all.end());
      std::sort(goal.begin(), goal.end());
      std::vector<int> expected(static_cast<std::size_t>(n));
      std::iota(expected.begin(), expected.end(), 1);
      if (all != expected) invalid_spec("towers must place every block exactly once");
      if (goal != expected) invalid_spec("goal tower must use every block exactly once");
      break;
    }
    case TaskKind::BallMoving: {
      const auto* m = std::get_if<BallMeta>(&meta);
      if (!m) invalid_spec("ball moving instance needs rooms");
      auto ok = [](int r) { return r >= 1 && r <= kRooms; };
      if (static_cast<int>(m->start_rooms.size()) != n ||
          static_cast<int>(m->goal_rooms.size()) != n) {
        invalid_spec("one start and one goal room per ball expected");
      }
      if (!ok(m->robot_room) || !std::all_of(m->start_rooms.begin(), m->start_rooms.end(), ok) ||
          !std::all_of(m->goal_rooms.begin(), m->goal_rooms.end(), ok)) {
        invalid_spec("room numbers must lie in 1.." + std::to_string(kRooms));
      }
      break;
    }
  }
}

int meta_size(TaskKind kind, const InstanceMeta& meta) {
  switch (kind) {
    case TaskKind::Cooking: return static_cast<int>(std::get<CookingMeta>(meta).recipes.size());
    case TaskKind::Blocksworld: return static_cast<int>(std::get<BlocksMeta>(meta).goal_tower.size());
    case TaskKind::BallMoving: return static_cast<int>(std::get<BallMeta>(meta).start_rooms.size());
  }
  return 0;
}

TaskKind kind_of(const InstanceMeta& meta) {
  if (std::holds_alternative<CookingMeta>(meta)) return TaskKind::Cooking;
  if (std::holds_alternative<BlocksMeta>(meta)) return TaskKind::Blocksworld;
  return TaskKind::BallMoving;
}

std::string collapse_spaces(std::string_view text) {
  std::string out;
  bool space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

int to_int(const std::string& digits, std::string_view what) {
  if (digits.size() > 6) mismatch(std::string(what) + " out of range: " + digits);
  return std::stoi(digits);
}

// Splits "a, b, and c" / "a and b" / "a".
std::vector<std::string> split_english_list(const std::string& text) {
  static const std::regex sep(R"(,\s*and\s+|,\s*|\s+and\s+)");
  std::vector<std::string> out;
  std::sregex_token_iterator it(text.begin(), text.end(), sep, -1), end;
  for (; it != end; ++it) {
    if (!it->str().empty()) out.push_back(it->str());
  }
  return out;
}

CookingMeta parse_cooking(const std::smatch& head) {
  int n = to_int(head[1].str(), "pot count");
  int ingredients = to_int(head[2].str(), "ingredient count");
  if (ingredients != kIngredients) {
    mismatch("cooking questions use " + std::to_string(kIngredients) + " ingredients");
  }
  if (n < 1) mismatch("no pots");
  CookingMeta meta;
  meta.recipes.resize(static_cast<std::size_t>(n));
  std::vector<bool> listed(static_cast<std::size_t>(n), false);
  std::string body = head[3].str();
  static const std::regex entry(R"(^pot(\d+) contains (.+)$)");
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t dot = body.find('.', pos);
    if (dot == std::string::npos) mismatch("recipe list must end with '.'");
    std::string sentence = body.substr(pos, dot - pos);
    pos = dot + 1;
    while (pos < body.size() && body[pos] == ' ') ++pos;
    std::smatch m;
    if (!std::regex_match(sentence, m, entry)) mismatch("unrecognized recipe '" + sentence + "'");
    int p = to_int(m[1].str(), "pot number");
    if (p < 1 || p > n || listed[static_cast<std::size_t>(p - 1)]) {
      mismatch("bad or repeated pot number in '" + sentence + "'");
    }
    listed[static_cast<std::size_t>(p - 1)] = true;
    std::vector<int>& recipe = meta.recipes[static_cast<std::size_t>(p - 1)];
    if (m[2].str() == "nothing") continue;
    static const std::regex item(R"(^ingredient(\d+)$)");
    for (const std::string& name : split_english_list(m[2].str())) {
      std::smatch im;
      if (!std::regex_match(name, im, item)) mismatch("unrecognized ingredient '" + name + "'");
      int k = to_int(im[1].str(), "ingredient number");
      if (k < 1 || k > kIngredients || std::find(recipe.begin(), recipe.end(), k) != recipe.end()) {
        mismatch("bad or repeated ingredient '" + name + "'");
      }
      recipe.push_back(k);
    }
    std::sort(recipe.begin(), recipe.end());
  }
  return meta;
}

BallMeta parse_ballmoving(const std::smatch& head) {
  int n = to_int(head[1].str(), "ball count");
  int rooms = to_int(head[2].str(), "room count");
  if (rooms != kRooms) mismatch("ball moving questions use " + std::to_string(kRooms) + " rooms");
  if (n < 1) mismatch("no balls");
  BallMeta meta;
  meta.robot_room = to_int(head[3].str(), "room number");
  meta.start_rooms.assign(static_cast<std::size_t>(n), 0);
  meta.goal_rooms.assign(static_cast<std::size_t>(n), 0);

  std::string starts = head[4].str();
  static const std::regex start(R"(Ball ball(\d+) is in room(\d+)\. ?)");
  std::size_t consumed = 0;
  for (std::sregex_iterator it(starts.begin(), starts.end(), start), end; it != end; ++it) {
    if (static_cast<std::size_t>(it->position()) != consumed) mismatch("unrecognized initial state");
    consumed += static_cast<std::size_t>(it->length());
    int b = to_int((*it)[1].str(), "ball number");
    if (b < 1 || b > n || meta.start_rooms[static_cast<std::size_t>(b - 1)] != 0) {
      mismatch("bad or repeated ball number " + std::to_string(b));
    }
    meta.start_rooms[static_cast<std::size_t>(b - 1)] = to_int((*it)[2].str(), "room number");
  }
  if (consumed != starts.size()) mismatch("unrecognized initial state");

  static const std::regex goal(R"(^ball(\d+) in room(\d+)$)");
  for (const std::string& item : split_english_list(head[5].str())) {
    std::smatch m;
    if (!std::regex_match(item, m, goal)) mismatch("unrecognized goal '" + item + "'");
    int b = to_int(m[1].str(), "ball number");
    if (b < 1 || b > n || meta.goal_rooms[static_cast<std::size_t>(b - 1)] != 0) {
      mismatch("bad or repeated ball number " + std::to_string(b));
    }
    meta.goal_rooms[static_cast<std::size_t>(b - 1)] = to_int(m[2].str(), "room number");
  }
  auto in_range = [](int r) { return r >= 1 && r <= kRooms; };
  if (!in_range(meta.robot_room) ||
      !std::all_of(meta.start_rooms.begin(), meta.start_rooms.end(), in_range) ||
      !std::all_of(meta.goal_rooms.begin(), meta.goal_rooms.end(), in_range)) {
    mismatch("every ball needs a start and a goal room in 1.." + std::to_string(kRooms));
  }
  return meta;
}

BlocksMeta parse_blocksworld(const std::smatch& head) {
  int n = to_int(head[1].str(), "block count");
  if (n < 1 || n > kMaxBlocks) mismatch("block count out of range");
  // below[b] = 0 for the table.
  std::vector<int> below(static_cast<std::size_t>(n + 1), -1);
  std::string init = head[2].str();
  static const std::regex fact(R"(Block b(\d+) is (?:on the table|on top of b(\d+))\. ?)");
  std::size_t consumed = 0;
  for (std::sregex_iterator it(init.begin(), init.end(), fact), end; it != end; ++it) {
    if (static_cast<std::size_t>(it->position()) != consumed) mismatch("unrecognized initial state");
    consumed += static_cast<std::size_t>(it->length());
    int b = to_int((*it)[1].str(), "block number");
    int under = (*it)[2].matched ? to_int((*it)[2].str(), "block number") : 0;
    if (b < 1 || b > n || below[static_cast<std::size_t>(b)] != -1 || under < 0 || under > n ||
        under == b) {
      mismatch("bad or repeated block in initial state");
    }
    below[static_cast<std::size_t>(b)] = under;
  }
  if (consumed != init.size()) mismatch("unrecognized initial state");

  BlocksMeta meta;
  std::vector<int> above(static_cast<std::size_t>(n + 1), 0);
  for (int b = 1; b <= n; ++b) {
    int under = below[static_cast<std::size_t>(b)];
    if (under == -1) mismatch("block b" + std::to_string(b) + " has no position");
    if (under > 0) {
      if (above[static_cast<std::size_t>(under)] != 0) mismatch("two blocks on one block");
      above[static_cast<std::size_t>(under)] = b;
    }
  }
  std::size_t placed = 0;
  for (int b = 1; b <= n; ++b) {
    if (below[static_cast<std::size_t>(b)] != 0) continue;
    std::vector<int> tower;
    for (int cur = b; cur != 0; cur = above[static_cast<std::size_t>(cur)]) tower.push_back(cur);
    placed += tower.size();
    meta.towers.push_back(std::move(tower));
  }
  if (placed != static_cast<std::size_t>(n)) mismatch("initial towers contain a cycle");

  // Listed top to bottom: "x on y, ..., z on table".
  static const std::regex item(R"(^b(\d+) on (?:table|b(\d+))$)");
  std::vector<std::string> items = split_english_list(head[3].str());
  std::vector<int> top_down;
  for (std::size_t i = 0; i < items.size(); ++i) {
    std::smatch m;
    if (!std::regex_match(items[i], m, item)) mismatch("unrecognized goal '" + items[i] + "'");
    int b = to_int(m[1].str(), "block number");
    bool last = i + 1 == items.size();
    if (m[2].matched == last) mismatch("goal must be a single tower ending on the table");
    if (!top_down.empty() && top_down.back() != b) mismatch("goal must be a single tower");
    top_down.push_back(b);
    if (!last) top_down.push_back(to_int(m[2].str(), "block number"));
  }
  // top_down holds "x y y z z ..." pairs; keep each block once.
  std::vector<int> tower;
  for (int b : top_down) {
    if (tower.empty() || tower.back() != b) tower.push_back(b);
  }
  std::reverse(tower.begin(), tower.end());
  meta.goal_tower = tower;
  std::vector<int> sorted = tower;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expected(static_cast<std::size_t>(n));
  std::iota(expected.begin(), expected.end(), 1);
  if (sorted != expected) mismatch("goal tower must use every block exactly once");
  return meta;
}

pddl::DomainDef load_canonical(TaskKind kind) {
  std::string path = "pddl/" + std::string(to_string(kind)) + "/example1.domain.pddl";
  return pddl::parse_domain(corpus::get(path));
}

}  // namespace

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Cooking: return "cooking";
    case TaskKind::Blocksworld: return "blocksworld";
    case TaskKind::BallMoving: return "ballmoving";
  }
  return "?";
}

std::string_view display_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::Cooking: return "Cooking";
    case TaskKind::Blocksworld: return "Blocksworld";
    case TaskKind::BallMoving: return "Ball Moving";
  }
  return "?";
}

TaskKind parse_task_kind(std::string_view name) {
  std::string s;
  for (char c : name) {
    if (c == '-' || c == '_' || c == ' ') continue;
    s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (s == "cooking") return TaskKind::Cooking;
  if (s == "blocksworld") return TaskKind::Blocksworld;
  if (s == "ballmoving") return TaskKind::BallMoving;
  throw Error(ErrorCode::UnknownTaskKind, std::string(name));
}

std::optional<TaskKind> detect_kind(const pddl::DomainDef& domain) {
  for (TaskKind k : kAllKinds) {
    if (domain.name == to_string(k)) return k;
  }
  return std::nullopt;
}

std::uint64_t Rng::uniform(std::uint64_t lo, std::uint64_t hi) {
  std::uint64_t range = hi - lo + 1;
  if (range == 0) return engine_();
  // Reject the lowest 2^64 mod range outputs so every residue is equally likely.
  std::uint64_t threshold = (0 - range) % range;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x < threshold);
  return lo + x % range;
}

unsigned __int128 Rng::uniform128(unsigned __int128 bound) {
  if (bound <= 1) return 0;
  u128 threshold = (0 - bound) % bound;
  u128 x;
  do {
    x = (static_cast<u128>(engine_()) << 64) | engine_();
  } while (x < threshold);
  return x % bound;
}

Instance gen_instance(const InstanceSpec& spec) {
  if (spec.n < 1) invalid_spec("n must be at least 1, got " + std::to_string(spec.n));
  Rng rng(spec.seed);
  InstanceMeta meta;
  switch (spec.kind) {
    case TaskKind::Cooking: {
      CookingMeta m;
      for (int p = 0; p < spec.n; ++p) {
        int size = static_cast<int>(rng.uniform(2, 4));
        m.recipes.push_back(subset(rng, kIngredients, size));
      }
      meta = std::move(m);
      break;
    }
    case TaskKind::Blocksworld: {
      if (spec.n > kMaxBlocks) invalid_spec("at most " + std::to_string(kMaxBlocks) + " blocks");
      BlocksMeta m;
      m.towers = sample_forest(rng, spec.n);
      m.goal_tower = permutation(rng, spec.n);
      meta = std::move(m);
      break;
    }
    case TaskKind::BallMoving: {
      BallMeta m;
      m.robot_room = static_cast<int>(rng.uniform(1, kRooms));
      for (int b = 0; b < spec.n; ++b) m.start_rooms.push_back(static_cast<int>(rng.uniform(1, kRooms)));
      for (int b = 0; b < spec.n; ++b) m.goal_rooms.push_back(static_cast<int>(rng.uniform(1, kRooms)));
      meta = std::move(m);
      break;
    }
  }
  return make_instance(spec, meta);
}

Instance make_instance(const InstanceSpec& spec, const InstanceMeta& meta) {
  if (kind_of(meta) != spec.kind) invalid_spec("layout does not match the task kind");
  check_meta(spec.kind, spec.n, meta);
  Instance inst;
  inst.spec = spec;
  inst.meta = meta;
  inst.nl_text = render_nl(meta);
  inst.domain_text = canonical_domain_text(spec.kind);
  inst.problem_text = pddl::print_problem(make_problem(spec.kind, meta));
  return inst;
}

std::vector<Instance> gen_batch(TaskKind kind, int n, std::uint64_t base_seed, int count) {
  if (count < 0) invalid_spec("negative count");
  std::vector<Instance> out;
  std::set<std::string> seen;
  const std::uint64_t max_attempts = static_cast<std::uint64_t>(count) * 100 + 1000;
  for (std::uint64_t i = 0; static_cast<int>(out.size()) < count; ++i) {
    if (i == max_attempts) {
      invalid_spec("could not find " + std::to_string(count) + " distinct " +
                   std::string(to_string(kind)) + " instances with n=" + std::to_string(n));
    }
    Instance inst = gen_instance(InstanceSpec{kind, n, base_seed + i});
    if (seen.insert(inst.nl_text).second) out.push_back(std::move(inst));
  }
  return out;
}

std::string render_nl(const Instance& instance) { return render_nl(instance.meta); }

std::string render_nl(const InstanceMeta& meta) {
  if (const auto* m = std::get_if<CookingMeta>(&meta)) {
    int n = static_cast<int>(m->recipes.size());
    std::string out = "I have " + plural(n, "pot") + " and " + plural(kIngredients, "different ingredient") +
                      ". Each ingredient can only be picked up once. Your goal is to add "
                      "ingredients to pots by following the receipts:";
    for (int p = 0; p < n; ++p) {
      const auto& recipe = m->recipes[static_cast<std::size_t>(p)];
      out += " " + pot(p + 1) + " contains ";
      if (recipe.empty()) out += "nothing";
      for (std::size_t i = 0; i < recipe.size(); ++i) {
        if (i) out += ", ";
        out += ingredient(recipe[i]);
      }
      out += ".";
    }
    return out;
  }
  if (const auto* m = std::get_if<BallMeta>(&meta)) {
    int n = static_cast<int>(m->start_rooms.size());
    std::string out = "I have " + plural(n, "ball") + " within " + plural(kRooms, "room") +
                      ". Initially: Robot is in " + room(m->robot_room) + ".";
    for (int b = 0; b < n; ++b) {
      out += " Ball " + ball(b + 1) + " is in " + room(m->start_rooms[static_cast<std::size_t>(b)]) + ".";
    }
    std::vector<std::string> goals;
    for (int b = 0; b < n; ++b) {
      goals.push_back(ball(b + 1) + " in " + room(m->goal_rooms[static_cast<std::size_t>(b)]));
    }
    return out + " Your goal is to move the balls to specific rooms: " + english_list(goals) + ".";
  }
  const auto& m = std::get<BlocksMeta>(meta);
  int n = static_cast<int>(m.goal_tower.size());
  std::map<int, int> below;
  for (const auto& tower : m.towers) {
    for (std::size_t i = 0; i < tower.size(); ++i) below[tower[i]] = i == 0 ? 0 : tower[i - 1];
  }
  std::string out = "I have " + plural(n, "block") + ". Initially:";
  for (const auto& [b, under] : below) {
    out += " Block " + block(b) + (under == 0 ? " is on the table." : " is on top of " + block(under) + ".");
  }
  std::vector<std::string> order;
  for (std::size_t i = m.goal_tower.size(); i-- > 0;) {
    order.push_back(block(m.goal_tower[i]) + " on " + (i == 0 ? "table" : block(m.goal_tower[i - 1])));
  }
  return out + " Your goal is to move the blocks such that they are stacked in the order: " +
         english_list(order) + ".";
}

std::optional<TaskKind> detect_question_kind(std::string_view nl_text) {
  static const std::regex cooking(R"(^I have \d+ pots? and)");
  static const std::regex balls(R"(^I have \d+ balls? within)");
  static const std::regex blocks(R"(^I have \d+ blocks?\.)");
  std::string text = collapse_spaces(nl_text);
  if (std::regex_search(text, cooking)) return TaskKind::Cooking;
  if (std::regex_search(text, balls)) return TaskKind::BallMoving;
  if (std::regex_search(text, blocks)) return TaskKind::Blocksworld;
  return std::nullopt;
}

Translation reference_translate(std::string_view nl_text) {
  static const std::regex cooking(
      R"(^I have (\d+) pots? and (\d+) different ingredients?\. Each ingredient can only be )"
      R"(picked up once\. Your goal is to add ingredients to pots by following the receipts: (.*)$)");
  static const std::regex balls(
      R"(^I have (\d+) balls? within (\d+) rooms?\. Initially: Robot is in room(\d+)\. (.*)Your )"
      R"(goal is to move the balls to specific rooms: (.*)\.$)");
  static const std::regex blocks(
      R"(^I have (\d+) blocks?\. Initially: (.*)Your goal is to move the blocks such that they )"
      R"(are stacked in the order: (.*)\.$)");
  std::string text = collapse_spaces(nl_text);
  std::smatch m;
  Translation out;
  InstanceMeta meta;
  if (std::regex_match(text, m, cooking)) {
    out.kind = TaskKind::Cooking;
    meta = parse_cooking(m);
  } else if (std::regex_match(text, m, balls)) {
    out.kind = TaskKind::BallMoving;
    meta = parse_ballmoving(m);
  } else if (std::regex_match(text, m, blocks)) {
    out.kind = TaskKind::Blocksworld;
    meta = parse_blocksworld(m);
  } else {
    std::string head = text.substr(0, 60);
    mismatch("question matches no known template: '" + head + (text.size() > 60 ? "...'" : "'"));
  }
  out.domain = canonical_domain(out.kind);
  out.problem = make_problem(out.kind, meta);
  return out;
}

const pddl::DomainDef& canonical_domain(TaskKind kind) {
  static const std::array<pddl::DomainDef, 3> domains = {
      load_canonical(TaskKind::Cooking), load_canonical(TaskKind::Blocksworld),
      load_canonical(TaskKind::BallMoving)};
  return domains[static_cast<std::size_t>(kind)];
}

const std::string& canonical_domain_text(TaskKind kind) {
  static const std::array<std::string, 3> texts = {
      pddl::print_domain(canonical_domain(TaskKind::Cooking)),
      pddl::print_domain(canonical_domain(TaskKind::Blocksworld)),
      pddl::print_domain(canonical_domain(TaskKind::BallMoving))};
  return texts[static_cast<std::size_t>(kind)];
}

pddl::ProblemDef make_problem(TaskKind kind, const InstanceMeta& meta) {
  if (kind_of(meta) != kind) invalid_spec("layout does not match the task kind");
  int n = meta_size(kind, meta);
  check_meta(kind, n, meta);
  pddl::ProblemDef p;
  p.domain_name = std::string(to_string(kind));
  switch (kind) {
    case TaskKind::Cooking: {
      const auto& m = std::get<CookingMeta>(meta);
      p.name = number_word(n) + "pots";
      for (int i = 1; i <= n; ++i) p.objects.push_back(object(pot(i), "pot"));
      for (int i = 1; i <= kIngredients; ++i) p.objects.push_back(object(ingredient(i), "ingredient"));
      p.init.push_back(atom("arm-empty", {}));
      for (int i = 1; i <= n; ++i) p.init.push_back(atom("pot-empty", {pot(i)}));
      for (int i = 1; i <= n; ++i) {
        for (int k : m.recipes[static_cast<std::size_t>(i - 1)]) {
          p.goal.push_back(atom("contain", {pot(i), ingredient(k)}));
        }
      }
      break;
    }
    case TaskKind::Blocksworld: {
      const auto& m = std::get<BlocksMeta>(meta);
      p.name = number_word(n) + "blocks";
      for (int i = 1; i <= n; ++i) p.objects.push_back(object(block(i)));
      std::map<int, int> below;
      std::set<int> clear;
      for (const auto& tower : m.towers) {
        for (std::size_t i = 0; i < tower.size(); ++i) below[tower[i]] = i == 0 ? 0 : tower[i - 1];
        clear.insert(tower.back());
      }
      p.init.push_back(atom("arm-empty", {}));
      for (const auto& [b, under] : below) {
        p.init.push_back(under == 0 ? atom("on-table", {block(b)}) : atom("on", {block(b), block(under)}));
      }
      for (int b : clear) p.init.push_back(atom("clear", {block(b)}));
      for (std::size_t i = m.goal_tower.size(); i-- > 1;) {
        p.goal.push_back(atom("on", {block(m.goal_tower[i]), block(m.goal_tower[i - 1])}));
      }
      p.goal.push_back(atom("on-table", {block(m.goal_tower.front())}));
      break;
    }
    case TaskKind::BallMoving: {
      const auto& m = std::get<BallMeta>(meta);
      p.name = number_word(n) + "balls";
      p.objects.push_back(object("robot1", "robot"));
      for (int i = 1; i <= kRooms; ++i) p.objects.push_back(object(room(i), "room"));
      for (int i = 1; i <= n; ++i) p.objects.push_back(object(ball(i), "ball"));
      p.init.push_back(atom("arm-empty", {}));
      p.init.push_back(atom("robot-at", {"robot1", room(m.robot_room)}));
      for (int i = 1; i <= n; ++i) {
        p.init.push_back(atom("at", {ball(i), room(m.start_rooms[static_cast<std::size_t>(i - 1)])}));
      }
      for (int i = 1; i <= n; ++i) {
        p.goal.push_back(atom("at", {ball(i), room(m.goal_rooms[static_cast<std::size_t>(i - 1)])}));
      }
      break;
    }
  }
  return p;
}

std::string number_word(int n) {
  static const char* const kWords[] = {"zero",    "one",     "two",       "three",    "four",
                                       "five",    "six",     "seven",     "eight",    "nine",
                                       "ten",     "eleven",  "twelve",    "thirteen", "fourteen",
                                       "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
                                       "twenty"};
  if (n >= 0 && n <= 20) return kWords[n];
  return std::to_string(n);
}

pddl::DomainDef enrich_cooking_domain(const pddl::DomainDef& domain) {
  const pddl::ActionSchema* pick = domain.find_action("pick");
  if (domain.name != "cooking" || pick == nullptr || pick->params.size() != 1 ||
      pick->params[0].type != "ingredient") {
    throw Error(ErrorCode::NotCookingDomain, "domain '" + domain.name + "'");
  }
  if (domain.find_predicate("unused")) throw Error(ErrorCode::AlreadyEnriched, domain.name);
  pddl::DomainDef out = domain;
  out.predicates.push_back(pddl::PredicateDecl{"unused", {pddl::TypedName{"i", "ingredient", true}}});
  for (pddl::ActionSchema& a : out.actions) {
    if (a.name != "pick") continue;
    pddl::Atom unused{"unused", {pddl::Term{a.params[0].name, true}}};
    a.precondition.push_back(pddl::Literal{unused, false});
    a.effects.push_back(pddl::Literal{unused, true});
  }
  return out;
}

pddl::ProblemDef enrich_cooking_problem(const pddl::ProblemDef& problem) {
  pddl::ProblemDef out = problem;
  for (const pddl::TypedName& o : problem.objects) {
    if (o.type != "ingredient") continue;
    pddl::Atom a = atom("unused", {o.name});
    if (std::find(out.init.begin(), out.init.end(), a) == out.init.end()) out.init.push_back(a);
  }
  return out;
}

world::Model enrich_cooking(const world::Model& model) {
  world::Model out = model;
  out.domain = enrich_cooking_domain(model.domain);
  for (const pddl::TypedName& o : model.objects) {
    if (o.type == "ingredient") out.init.atoms.insert(world::GroundAtom{"unused", {o.name}});
  }
  return out;
}

}  // namespace planloop::domains
