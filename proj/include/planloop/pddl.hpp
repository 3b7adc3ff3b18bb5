#pragma once

// Abstract syntax, parser and printer for the STRIPS subset of PDDL used by
// the cooking, blocksworld and ballmoving task families: flat :types,
// :predicates, and :action blocks whose precondition and effect are
// conjunctions of (possibly negated) atoms.

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace planloop::pddl {

inline constexpr std::string_view kObjectType = "object";

struct Term {
  std::string name;
  bool variable = false;

  auto operator<=>(const Term&) const = default;
};

/// A parameter or object declaration. Variables are stored without the
/// leading '?' and flagged instead.
struct TypedName {
  std::string name;
  std::string type{kObjectType};
  bool variable = false;

  auto operator<=>(const TypedName&) const = default;
};

struct Atom {
  std::string predicate;
  std::vector<Term> args;

  auto operator<=>(const Atom&) const = default;
};

struct Literal {
  Atom atom;
  bool negated = false;

  auto operator<=>(const Literal&) const = default;
};

struct PredicateDecl {
  std::string name;
  std::vector<TypedName> params;

  auto operator<=>(const PredicateDecl&) const = default;
};

struct ActionSchema {
  std::string name;
  std::vector<TypedName> params;
  std::vector<Literal> precondition;
  std::vector<Literal> effects;

  auto operator<=>(const ActionSchema&) const = default;
};

struct DomainDef {
  std::string name;
  std::vector<std::string> types;
  std::vector<PredicateDecl> predicates;
  std::vector<ActionSchema> actions;

  const ActionSchema* find_action(std::string_view action) const;
  const PredicateDecl* find_predicate(std::string_view predicate) const;
  bool has_type(std::string_view type) const;

  bool operator==(const DomainDef&) const = default;
};

struct ProblemDef {
  std::string name;
  std::string domain_name;
  std::vector<TypedName> objects;
  std::vector<Atom> init;
  std::vector<Atom> goal;

  bool operator==(const ProblemDef&) const = default;
};

/// Strips ';' comments, lowercases, splits "-type" into "- type" and
/// collapses whitespace runs into single spaces. Idempotent.
std::string normalize_source(std::string_view text);

/// Both parsers normalize their input first.
DomainDef parse_domain(std::string_view text);
ProblemDef parse_problem(std::string_view text, const DomainDef& domain);

std::string print_domain(const DomainDef& domain);
std::string print_problem(const ProblemDef& problem);

std::string to_string(const Term& term);
std::string to_string(const Atom& atom);
std::string to_string(const Literal& literal);

}  // namespace planloop::pddl
