#include "planloop/pddl.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <utility>

#include "planloop/error.hpp"

namespace planloop::pddl {

namespace {

struct SExpr {
  bool is_list = false;
  std::string symbol;
  std::vector<SExpr> items;
  std::size_t offset = 0;

  bool is_symbol(std::string_view s) const { return !is_list && symbol == s; }
  // Head symbol of a list, or empty.
  std::string_view head() const {
    if (!is_list || items.empty() || items.front().is_list) return {};
    return items.front().symbol;
  }
};

[[noreturn]] void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

std::string describe(const SExpr& e) {
  if (!e.is_list) return e.symbol;
  std::string out = "(";
  for (std::size_t i = 0; i < e.items.size(); ++i) {
    if (i) out += ' ';
    out += describe(e.items[i]);
  }
  return out + ")";
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  SExpr read_document() {
    check_balance();
    skip_space();
    if (pos_ >= text_.size()) fail(ErrorCode::SyntaxError, "empty input");
    SExpr top = read();
    skip_space();
    if (pos_ < text_.size()) {
      fail(ErrorCode::SyntaxError,
           "unexpected trailing input at position " + std::to_string(pos_));
    }
    return top;
  }

 private:
  void check_balance() const {
    long depth = 0;
    for (std::size_t i = 0; i < text_.size(); ++i) {
      if (text_[i] == '(') ++depth;
      if (text_[i] == ')' && --depth < 0) {
        fail(ErrorCode::UnbalancedParens,
             "unmatched ')' at position " + std::to_string(i));
      }
    }
    if (depth != 0) {
      fail(ErrorCode::UnbalancedParens,
           std::to_string(depth) + " unclosed '(' at end of input (position " +
               std::to_string(text_.size()) + ")");
    }
  }

  void skip_space() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  SExpr read() {
    skip_space();
    SExpr e;
    e.offset = pos_;
    if (text_[pos_] == '(') {
      e.is_list = true;
      ++pos_;
      for (;;) {
        skip_space();
        if (text_[pos_] == ')') {
          ++pos_;
          return e;
        }
        e.items.push_back(read());
      }
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    e.symbol = std::string(text_.substr(start, pos_ - start));
    return e;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

bool valid_symbol(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::islower(static_cast<unsigned char>(c)) ||
           std::isdigit(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

std::string expect_symbol(const SExpr& e, std::string_view what) {
  if (e.is_list || !valid_symbol(e.symbol)) {
    fail(ErrorCode::SyntaxError,
         "expected " + std::string(what) + ", got '" + describe(e) + "'");
  }
  return e.symbol;
}

// Parses "a b - t c ?x - u" style lists. Untyped trailing names get "object".
std::vector<TypedName> parse_typed_list(const std::vector<SExpr>& items,
                                        std::size_t first, bool variables) {
  std::vector<TypedName> out;
  std::size_t pending_from = 0;
  for (std::size_t i = first; i < items.size(); ++i) {
    const SExpr& item = items[i];
    if (item.is_symbol("-")) {
      if (i + 1 >= items.size()) fail(ErrorCode::SyntaxError, "'-' without a type");
      std::string type = expect_symbol(items[i + 1], "type name");
      if (pending_from == out.size()) {
        fail(ErrorCode::SyntaxError, "type '" + type + "' applies to no names");
      }
      for (std::size_t k = pending_from; k < out.size(); ++k) out[k].type = type;
      pending_from = out.size();
      ++i;
      continue;
    }
    if (item.is_list) {
      fail(ErrorCode::SyntaxError, "unexpected list '" + describe(item) + "' in typed list");
    }
    TypedName name;
    if (variables) {
      if (item.symbol.size() < 2 || item.symbol.front() != '?') {
        fail(ErrorCode::SyntaxError, "expected a variable, got '" + item.symbol + "'");
      }
      name.name = item.symbol.substr(1);
      name.variable = true;
    } else {
      name.name = item.symbol;
    }
    if (!valid_symbol(name.name)) {
      fail(ErrorCode::SyntaxError, "invalid name '" + item.symbol + "'");
    }
    out.push_back(std::move(name));
  }
  return out;
}

void check_type(const DomainDef& domain, const std::string& type) {
  if (type != kObjectType && !domain.has_type(type)) {
    fail(ErrorCode::UndeclaredType, type);
  }
}

Atom parse_atom(const SExpr& e) {
  if (!e.is_list || e.items.empty() || e.items.front().is_list) {
    fail(ErrorCode::SyntaxError, "expected an atom, got '" + describe(e) + "'");
  }
  Atom atom;
  atom.predicate = expect_symbol(e.items.front(), "predicate name");
  if (atom.predicate == "and" || atom.predicate == "not") {
    fail(ErrorCode::SyntaxError, "unexpected '" + atom.predicate + "' in '" + describe(e) + "'");
  }
  for (std::size_t i = 1; i < e.items.size(); ++i) {
    const SExpr& arg = e.items[i];
    if (arg.is_list) fail(ErrorCode::SyntaxError, "nested term in '" + describe(e) + "'");
    // "?i - ingredient" inside an action atom: the annotation repeats the
    // parameter's type and is dropped.
    if (arg.symbol == "-" && !atom.args.empty() && atom.args.back().variable && i + 1 < e.items.size() &&
        !e.items[i + 1].is_list && valid_symbol(e.items[i + 1].symbol)) {
      ++i;
      continue;
    }
    Term term;
    if (!arg.symbol.empty() && arg.symbol.front() == '?') {
      term.name = arg.symbol.substr(1);
      term.variable = true;
    } else {
      term.name = arg.symbol;
    }
    if (!valid_symbol(term.name)) fail(ErrorCode::SyntaxError, "invalid term '" + arg.symbol + "'");
    atom.args.push_back(std::move(term));
  }
  return atom;
}

Literal parse_literal(const SExpr& e) {
  if (e.head() == "not") {
    if (e.items.size() != 2) fail(ErrorCode::SyntaxError, "malformed '" + describe(e) + "'");
    return Literal{parse_atom(e.items[1]), true};
  }
  return Literal{parse_atom(e), false};
}

// "()" | "(and lit...)" | lit
std::vector<Literal> parse_conjunction(const SExpr& e) {
  std::vector<Literal> out;
  if (e.is_list && e.items.empty()) return out;
  if (e.head() == "and") {
    for (std::size_t i = 1; i < e.items.size(); ++i) out.push_back(parse_literal(e.items[i]));
    return out;
  }
  out.push_back(parse_literal(e));
  return out;
}

void check_atom_against(const DomainDef& domain, const Atom& atom) {
  const PredicateDecl* decl = domain.find_predicate(atom.predicate);
  if (decl == nullptr) fail(ErrorCode::UnknownPredicate, atom.predicate);
  if (decl->params.size() != atom.args.size()) {
    fail(ErrorCode::ArityError, atom.predicate + " expects " +
                                    std::to_string(decl->params.size()) +
                                    " argument(s), got " + std::to_string(atom.args.size()) +
                                    " in " + to_string(atom));
  }
}

ActionSchema parse_action(const SExpr& e, const DomainDef& domain) {
  if (e.items.size() < 2) fail(ErrorCode::SyntaxError, "action without a name");
  ActionSchema action;
  action.name = expect_symbol(e.items[1], "action name");
  bool seen_params = false, seen_pre = false, seen_eff = false;
  for (std::size_t i = 2; i < e.items.size(); i += 2) {
    const SExpr& key = e.items[i];
    if (key.is_list || i + 1 >= e.items.size()) {
      fail(ErrorCode::SyntaxError, "malformed action '" + action.name + "'");
    }
    const SExpr& value = e.items[i + 1];
    if (key.symbol == ":parameters" && !seen_params) {
      if (!value.is_list) fail(ErrorCode::SyntaxError, ":parameters expects a list");
      action.params = parse_typed_list(value.items, 0, true);
      seen_params = true;
    } else if (key.symbol == ":precondition" && !seen_pre) {
      action.precondition = parse_conjunction(value);
      seen_pre = true;
    } else if (key.symbol == ":effect" && !seen_eff) {
      action.effects = parse_conjunction(value);
      seen_eff = true;
    } else {
      fail(ErrorCode::SyntaxError,
           "unexpected key '" + key.symbol + "' in action '" + action.name + "'");
    }
  }

  std::set<std::string> names;
  for (const TypedName& p : action.params) {
    if (!names.insert(p.name).second) {
      fail(ErrorCode::DuplicateParameter, "?" + p.name + " in action " + action.name);
    }
    check_type(domain, p.type);
  }
  auto check_literals = [&](const std::vector<Literal>& literals) {
    for (const Literal& lit : literals) {
      check_atom_against(domain, lit.atom);
      for (const Term& t : lit.atom.args) {
        if (!t.variable) {
          fail(ErrorCode::SyntaxError, "constant '" + t.name + "' in action " + action.name +
                                           " (schemas may only use parameters)");
        }
        if (!names.contains(t.name)) {
          fail(ErrorCode::UndeclaredVariable, "?" + t.name + " in action " + action.name);
        }
      }
    }
  };
  check_literals(action.precondition);
  check_literals(action.effects);
  return action;
}

const SExpr& expect_define(const SExpr& top, std::string_view kind, std::string& name) {
  if (top.head() != "define" || top.items.size() < 2 || top.items[1].head() != kind ||
      top.items[1].items.size() != 2) {
    fail(ErrorCode::SyntaxError,
         "expected (define (" + std::string(kind) + " <name>) ...)");
  }
  name = expect_symbol(top.items[1].items[1], std::string(kind) + " name");
  return top;
}

bool type_accepts(const std::string& param_type, const std::string& object_type) {
  return param_type == kObjectType || param_type == object_type;
}

// Groups consecutive names sharing a type. An "object" group is written bare
// only when nothing typed follows it; otherwise "- object" is spelled out so
// the list reparses identically.
std::string print_typed_list(const std::vector<TypedName>& names, std::string_view group_sep) {
  std::string out;
  std::size_t i = 0;
  while (i < names.size()) {
    std::size_t j = i;
    while (j < names.size() && names[j].type == names[i].type) ++j;
    if (i) out += group_sep;
    for (std::size_t k = i; k < j; ++k) {
      if (k > i) out += ' ';
      if (names[k].variable) out += '?';
      out += names[k].name;
    }
    if (names[i].type != kObjectType || j < names.size()) out += " - " + names[i].type;
    i = j;
  }
  return out;
}

std::string print_conjunction(const std::vector<Literal>& literals) {
  std::string out = "(and";
  for (const Literal& lit : literals) out += " " + to_string(lit);
  return out + ")";
}

}  // namespace

const ActionSchema* DomainDef::find_action(std::string_view action) const {
  auto it = std::find_if(actions.begin(), actions.end(),
                         [&](const ActionSchema& a) { return a.name == action; });
  return it == actions.end() ? nullptr : &*it;
}

const PredicateDecl* DomainDef::find_predicate(std::string_view predicate) const {
  auto it = std::find_if(predicates.begin(), predicates.end(),
                         [&](const PredicateDecl& p) { return p.name == predicate; });
  return it == predicates.end() ? nullptr : &*it;
}

bool DomainDef::has_type(std::string_view type) const {
  return std::find(types.begin(), types.end(), type) != types.end();
}

std::string normalize_source(std::string_view text) {
  std::string stripped;
  stripped.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == ';') {
      while (i < text.size() && text[i] != '\n') ++i;
      stripped += '\n';
      continue;
    }
    stripped += static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
  }

  std::string out;
  out.reserve(stripped.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < stripped.size(); ++i) {
    char c = stripped[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    out += c;
    // "?i -ingredient": a hyphen opening a token and glued to a type name.
    bool opens_token = out.size() == 1 || out[out.size() - 2] == ' ' || out[out.size() - 2] == '(';
    if (c == '-' && opens_token && i + 1 < stripped.size() &&
        std::isalpha(static_cast<unsigned char>(stripped[i + 1]))) {
      pending_space = true;
    }
  }
  return out;
}

DomainDef parse_domain(std::string_view text) {
  std::string normalized = normalize_source(text);
  SExpr top = Reader(normalized).read_document();
  DomainDef domain;
  expect_define(top, "domain", domain.name);

  bool seen_types = false, seen_predicates = false;
  for (std::size_t i = 2; i < top.items.size(); ++i) {
    const SExpr& section = top.items[i];
    std::string_view head = section.head();
    if (head == ":types" && !seen_types && domain.actions.empty() && !seen_predicates) {
      for (const TypedName& t : parse_typed_list(section.items, 1, false)) {
        if (t.type != kObjectType) {
          fail(ErrorCode::SyntaxError, "type hierarchies are not supported ('" + t.name +
                                           " - " + t.type + "')");
        }
        if (t.name == kObjectType || domain.has_type(t.name)) {
          fail(ErrorCode::SyntaxError, "duplicate type '" + t.name + "'");
        }
        domain.types.push_back(t.name);
      }
      seen_types = true;
    } else if (head == ":predicates" && !seen_predicates && domain.actions.empty()) {
      for (std::size_t k = 1; k < section.items.size(); ++k) {
        const SExpr& p = section.items[k];
        if (!p.is_list || p.items.empty()) {
          fail(ErrorCode::SyntaxError, "malformed predicate '" + describe(p) + "'");
        }
        PredicateDecl decl;
        decl.name = expect_symbol(p.items.front(), "predicate name");
        decl.params = parse_typed_list(p.items, 1, true);
        for (const TypedName& param : decl.params) check_type(domain, param.type);
        if (domain.find_predicate(decl.name)) fail(ErrorCode::DuplicatePredicate, decl.name);
        domain.predicates.push_back(std::move(decl));
      }
      seen_predicates = true;
    } else if (head == ":action") {
      ActionSchema action = parse_action(section, domain);
      if (domain.find_action(action.name)) fail(ErrorCode::DuplicateAction, action.name);
      domain.actions.push_back(std::move(action));
    } else if (head.empty()) {
      fail(ErrorCode::SyntaxError, "unexpected '" + describe(section) + "' in domain");
    } else if (head == ":types" || head == ":predicates") {
      fail(ErrorCode::SyntaxError, "misplaced or repeated section " + std::string(head));
    } else {
      fail(ErrorCode::UnknownSection, std::string(head));
    }
  }
  return domain;
}

ProblemDef parse_problem(std::string_view text, const DomainDef& domain) {
  std::string normalized = normalize_source(text);
  SExpr top = Reader(normalized).read_document();
  ProblemDef problem;
  expect_define(top, "problem", problem.name);

  bool seen_domain = false, seen_objects = false, seen_init = false, seen_goal = false;
  std::vector<const SExpr*> init_items;
  const SExpr* goal_expr = nullptr;
  for (std::size_t i = 2; i < top.items.size(); ++i) {
    const SExpr& section = top.items[i];
    std::string_view head = section.head();
    if (head == ":domain" && !seen_domain) {
      if (section.items.size() != 2) fail(ErrorCode::SyntaxError, "malformed (:domain ...)");
      problem.domain_name = expect_symbol(section.items[1], "domain name");
      if (problem.domain_name != domain.name) {
        fail(ErrorCode::DomainMismatch,
             "problem targets '" + problem.domain_name + "' but domain is '" + domain.name + "'");
      }
      seen_domain = true;
    } else if (head == ":objects" && !seen_objects) {
      problem.objects = parse_typed_list(section.items, 1, false);
      seen_objects = true;
    } else if (head == ":init" && !seen_init) {
      for (std::size_t k = 1; k < section.items.size(); ++k) init_items.push_back(&section.items[k]);
      seen_init = true;
    } else if (head == ":goal" && !seen_goal) {
      if (section.items.size() != 2) fail(ErrorCode::SyntaxError, "malformed (:goal ...)");
      goal_expr = &section.items[1];
      seen_goal = true;
    } else if (head.empty()) {
      fail(ErrorCode::SyntaxError, "unexpected '" + describe(section) + "' in problem");
    } else if (head == ":domain" || head == ":objects" || head == ":init" || head == ":goal") {
      fail(ErrorCode::SyntaxError, "repeated section " + std::string(head));
    } else {
      fail(ErrorCode::UnknownSection, std::string(head));
    }
  }
  if (!seen_domain) fail(ErrorCode::SyntaxError, "problem lacks (:domain ...)");

  std::set<std::string> seen_names;
  for (const TypedName& object : problem.objects) {
    check_type(domain, object.type);
    if (!seen_names.insert(object.name).second) {
      fail(ErrorCode::SyntaxError, "duplicate object '" + object.name + "'");
    }
  }

  auto check_ground = [&](const Atom& atom) {
    check_atom_against(domain, atom);
    const PredicateDecl* decl = domain.find_predicate(atom.predicate);
    for (std::size_t k = 0; k < atom.args.size(); ++k) {
      const Term& t = atom.args[k];
      if (t.variable) fail(ErrorCode::NonGroundAtom, to_string(atom));
      auto obj = std::find_if(problem.objects.begin(), problem.objects.end(),
                              [&](const TypedName& o) { return o.name == t.name; });
      if (obj == problem.objects.end()) {
        fail(ErrorCode::UndeclaredObject, t.name + " in " + to_string(atom));
      }
      if (!type_accepts(decl->params[k].type, obj->type)) {
        fail(ErrorCode::TypeMismatch, t.name + " is a " + obj->type + " but " + atom.predicate +
                                          " expects a " + decl->params[k].type + " in " +
                                          to_string(atom));
      }
    }
  };

  for (const SExpr* item : init_items) {
    if (item->head() == "not") fail(ErrorCode::SyntaxError, "negative literal in :init");
    Atom atom = parse_atom(*item);
    check_ground(atom);
    problem.init.push_back(std::move(atom));
  }
  if (goal_expr != nullptr) {
    for (Literal& lit : parse_conjunction(*goal_expr)) {
      if (lit.negated) fail(ErrorCode::NegativeGoal, to_string(lit));
      check_ground(lit.atom);
      problem.goal.push_back(std::move(lit.atom));
    }
  }
  return problem;
}

std::string to_string(const Term& term) {
  return term.variable ? "?" + term.name : term.name;
}

std::string to_string(const Atom& atom) {
  std::string out = "(" + atom.predicate;
  for (const Term& t : atom.args) out += " " + to_string(t);
  return out + ")";
}

std::string to_string(const Literal& literal) {
  return literal.negated ? "(not " + to_string(literal.atom) + ")" : to_string(literal.atom);
}

std::string print_domain(const DomainDef& domain) {
  std::string out = "(define (domain " + domain.name + ")\n";
  if (!domain.types.empty()) {
    out += "(:types";
    for (const std::string& t : domain.types) out += " " + t;
    out += ")\n";
  }
  out += "(:predicates\n";
  for (const PredicateDecl& p : domain.predicates) {
    out += "(" + p.name;
    if (!p.params.empty()) out += " " + print_typed_list(p.params, " ");
    out += ")\n";
  }
  out += ")\n";
  for (const ActionSchema& a : domain.actions) {
    out += "(:action " + a.name + "\n";
    out += "  :parameters (" + print_typed_list(a.params, " ") + ")\n";
    out += "  :precondition " + print_conjunction(a.precondition) + "\n";
    out += "  :effect " + print_conjunction(a.effects) + "\n";
    out += ")\n";
  }
  out += ")\n";
  return out;
}

std::string print_problem(const ProblemDef& problem) {
  std::string out = "(define (problem " + problem.name + ")\n";
  out += "(:domain " + problem.domain_name + ")\n";
  out += "(:objects";
  if (!problem.objects.empty()) out += " " + print_typed_list(problem.objects, "\n");
  out += ")\n(:init\n";
  for (const Atom& a : problem.init) out += to_string(a) + "\n";
  out += ")\n(:goal\n";
  if (problem.goal.empty()) {
    out += "(and)\n";
  } else {
    out += "(and\n";
    for (std::size_t i = 0; i < problem.goal.size(); ++i) {
      out += to_string(problem.goal[i]);
      out += i + 1 == problem.goal.size() ? ")\n" : "\n";
    }
  }
  out += ")\n)\n";
  return out;
}

}  // namespace planloop::pddl
