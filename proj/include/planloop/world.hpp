#pragma once

// States, ground actions and the STRIPS transition function over a parsed
// domain/problem pair. States are closed-world sets of positive ground atoms.

#include <compare>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "planloop/pddl.hpp"

namespace planloop::world {

struct GroundAtom {
  std::string predicate;
  std::vector<std::string> args;

  auto operator<=>(const GroundAtom&) const = default;
};

struct GroundLiteral {
  GroundAtom atom;
  bool negated = false;

  auto operator<=>(const GroundLiteral&) const = default;
};

struct GroundAction {
  std::string name;
  std::vector<std::string> args;

  auto operator<=>(const GroundAction&) const = default;
};

using Plan = std::vector<GroundAction>;

struct State {
  std::set<GroundAtom> atoms;

  bool contains(const GroundAtom& atom) const { return atoms.contains(atom); }
  auto operator<=>(const State&) const = default;
};

struct Model {
  pddl::DomainDef domain;
  std::string problem_name;
  std::vector<pddl::TypedName> objects;
  State init;
  std::vector<GroundAtom> goal;

  const pddl::TypedName* find_object(std::string_view name) const;
  /// Declaration order. "object" matches every object.
  std::vector<std::string> objects_of_type(std::string_view type) const;
};

/// Builds a model from a parsed pair. Throws DomainMismatch when the problem
/// names another domain.
Model make_model(const pddl::DomainDef& domain, const pddl::ProblemDef& problem);

/// Parses both texts and builds the model.
Model load_model(std::string_view domain_text, std::string_view problem_text);

/// Inverse of make_model (init atoms in sorted order).
pddl::ProblemDef to_problem(const Model& model);

struct Binding {
  std::vector<GroundLiteral> precondition;
  std::vector<GroundAtom> add;
  std::vector<GroundAtom> del;
};

/// Throws ArityMismatch or TypeMismatch (an undeclared object is a type
/// mismatch against every parameter type).
Binding bind(const pddl::ActionSchema& schema, const std::vector<std::string>& args,
             const Model& model);
/// As above after resolving the schema; throws UnknownAction.
Binding bind(const GroundAction& action, const Model& model);

struct Applicability {
  bool satisfied = false;
  std::vector<GroundLiteral> unmet;
};

Applicability applicable(const State& state, const GroundAction& action, const Model& model);

/// Deletes before adds. Throws NotApplicable listing the unmet literals.
State apply(const State& state, const GroundAction& action, const Model& model);

struct GoalCheck {
  bool satisfied = false;
  std::vector<GroundAtom> unmet;
};

GoalCheck holds(const State& state, const std::vector<GroundAtom>& goal);

/// Every type-correct binding of every schema, sorted.
std::vector<GroundAction> ground_actions(const Model& model);

/// The members of ground_actions(model) applicable in state, sorted.
std::vector<GroundAction> applicable_actions(const State& state, const Model& model);

std::string to_string(const GroundAtom& atom);
std::string to_string(const GroundLiteral& literal);
std::string to_string(const GroundAction& action);

GroundAtom ground(const pddl::Atom& atom);

/// "(stack b1 b2)" in any casing. No model checks.
GroundAction parse_action(std::string_view text);

/// One s-expression per action, any whitespace between them. ';' comments
/// are ignored.
Plan parse_plan(std::string_view text);

/// Newline-separated s-expressions, each line terminated.
std::string format_plan(const Plan& plan);

/// Sorted atom lines.
std::string dump_state(const State& state);

}  // namespace planloop::world
