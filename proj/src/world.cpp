#include "planloop/world.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "planloop/error.hpp"

namespace planloop::world {

namespace {

bool type_accepts(const std::string& param_type, const std::string& object_type) {
  return param_type == pddl::kObjectType || param_type == object_type;
}

GroundAtom substitute(const pddl::Atom& atom, const std::map<std::string, std::string>& env) {
  GroundAtom out{atom.predicate, {}};
  out.args.reserve(atom.args.size());
  for (const pddl::Term& t : atom.args) {
    out.args.push_back(t.variable ? env.at(t.name) : t.name);
  }
  return out;
}

std::string join_literals(const std::vector<GroundLiteral>& literals) {
  std::string out;
  for (std::size_t i = 0; i < literals.size(); ++i) {
    if (i) out += ", ";
    out += to_string(literals[i]);
  }
  return out;
}

}  // namespace

const pddl::TypedName* Model::find_object(std::string_view name) const {
  auto it = std::find_if(objects.begin(), objects.end(),
                         [&](const pddl::TypedName& o) { return o.name == name; });
  return it == objects.end() ? nullptr : &*it;
}

std::vector<std::string> Model::objects_of_type(std::string_view type) const {
  std::vector<std::string> out;
  for (const pddl::TypedName& o : objects) {
    if (type == pddl::kObjectType || o.type == type) out.push_back(o.name);
  }
  return out;
}

Model make_model(const pddl::DomainDef& domain, const pddl::ProblemDef& problem) {
  if (problem.domain_name != domain.name) {
    throw Error(ErrorCode::DomainMismatch,
                "problem targets '" + problem.domain_name + "' but domain is '" + domain.name + "'");
  }
  Model model;
  model.domain = domain;
  model.problem_name = problem.name;
  model.objects = problem.objects;
  for (const pddl::Atom& a : problem.init) model.init.atoms.insert(ground(a));
  for (const pddl::Atom& a : problem.goal) model.goal.push_back(ground(a));
  return model;
}

Model load_model(std::string_view domain_text, std::string_view problem_text) {
  pddl::DomainDef domain = pddl::parse_domain(domain_text);
  return make_model(domain, pddl::parse_problem(problem_text, domain));
}

pddl::ProblemDef to_problem(const Model& model) {
  pddl::ProblemDef problem;
  problem.name = model.problem_name;
  problem.domain_name = model.domain.name;
  problem.objects = model.objects;
  auto lift = [](const GroundAtom& g) {
    pddl::Atom a{g.predicate, {}};
    for (const std::string& arg : g.args) a.args.push_back(pddl::Term{arg, false});
    return a;
  };
  for (const GroundAtom& g : model.init.atoms) problem.init.push_back(lift(g));
  for (const GroundAtom& g : model.goal) problem.goal.push_back(lift(g));
  return problem;
}

Binding bind(const pddl::ActionSchema& schema, const std::vector<std::string>& args,
             const Model& model) {
  if (args.size() != schema.params.size()) {
    throw Error(ErrorCode::ArityMismatch, schema.name + " expects " +
                                              std::to_string(schema.params.size()) +
                                              " argument(s), got " + std::to_string(args.size()));
  }
  std::map<std::string, std::string> env;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const pddl::TypedName& param = schema.params[i];
    const pddl::TypedName* object = model.find_object(args[i]);
    if (object == nullptr) {
      throw Error(ErrorCode::TypeMismatch, args[i] + " is not a declared object (parameter ?" +
                                               param.name + " expects " + param.type + ")");
    }
    if (!type_accepts(param.type, object->type)) {
      throw Error(ErrorCode::TypeMismatch, "parameter ?" + param.name + " of " + schema.name +
                                               " expects " + param.type + " but " + args[i] +
                                               " is " + object->type);
    }
    env[param.name] = args[i];
  }
  Binding out;
  for (const pddl::Literal& lit : schema.precondition) {
    out.precondition.push_back(GroundLiteral{substitute(lit.atom, env), lit.negated});
  }
  for (const pddl::Literal& lit : schema.effects) {
    (lit.negated ? out.del : out.add).push_back(substitute(lit.atom, env));
  }
  return out;
}

Binding bind(const GroundAction& action, const Model& model) {
  const pddl::ActionSchema* schema = model.domain.find_action(action.name);
  if (schema == nullptr) throw Error(ErrorCode::UnknownAction, action.name);
  return bind(*schema, action.args, model);
}

Applicability applicable(const State& state, const GroundAction& action, const Model& model) {
  Binding b = bind(action, model);
  Applicability out;
  for (const GroundLiteral& lit : b.precondition) {
    if (state.contains(lit.atom) == lit.negated) out.unmet.push_back(lit);
  }
  out.satisfied = out.unmet.empty();
  return out;
}

State apply(const State& state, const GroundAction& action, const Model& model) {
  Binding b = bind(action, model);
  std::vector<GroundLiteral> unmet;
  for (const GroundLiteral& lit : b.precondition) {
    if (state.contains(lit.atom) == lit.negated) unmet.push_back(lit);
  }
  if (!unmet.empty()) {
    throw Error(ErrorCode::NotApplicable, to_string(action) + ": " + join_literals(unmet));
  }
  State next = state;
  for (const GroundAtom& a : b.del) next.atoms.erase(a);
  for (const GroundAtom& a : b.add) next.atoms.insert(a);
  return next;
}

GoalCheck holds(const State& state, const std::vector<GroundAtom>& goal) {
  GoalCheck out;
  for (const GroundAtom& g : goal) {
    if (!state.contains(g)) out.unmet.push_back(g);
  }
  out.satisfied = out.unmet.empty();
  return out;
}

std::vector<GroundAction> ground_actions(const Model& model) {
  std::vector<GroundAction> out;
  for (const pddl::ActionSchema& schema : model.domain.actions) {
    std::vector<std::vector<std::string>> choices;
    bool empty = false;
    for (const pddl::TypedName& p : schema.params) {
      choices.push_back(model.objects_of_type(p.type));
      empty = empty || choices.back().empty();
    }
    if (empty) continue;
    std::vector<std::size_t> idx(choices.size(), 0);
    for (;;) {
      GroundAction a{schema.name, {}};
      for (std::size_t i = 0; i < idx.size(); ++i) a.args.push_back(choices[i][idx[i]]);
      out.push_back(std::move(a));
      std::size_t k = idx.size();
      while (k > 0 && ++idx[k - 1] == choices[k - 1].size()) idx[--k] = 0;
      if (k == 0) break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<GroundAction> applicable_actions(const State& state, const Model& model) {
  std::vector<GroundAction> out;
  for (GroundAction& a : ground_actions(model)) {
    if (applicable(state, a, model).satisfied) out.push_back(std::move(a));
  }
  return out;
}

std::string to_string(const GroundAtom& atom) {
  std::string out = "(" + atom.predicate;
  for (const std::string& a : atom.args) out += " " + a;
  return out + ")";
}

std::string to_string(const GroundLiteral& literal) {
  return literal.negated ? "(not " + to_string(literal.atom) + ")" : to_string(literal.atom);
}

std::string to_string(const GroundAction& action) {
  std::string out = "(" + action.name;
  for (const std::string& a : action.args) out += " " + a;
  return out + ")";
}

GroundAtom ground(const pddl::Atom& atom) {
  GroundAtom out{atom.predicate, {}};
  for (const pddl::Term& t : atom.args) {
    if (t.variable) throw Error(ErrorCode::NonGroundAtom, pddl::to_string(atom));
    out.args.push_back(t.name);
  }
  return out;
}

Plan parse_plan(std::string_view text) {
  Plan plan;
  std::size_t i = 0;
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (i < text.size()) {
    char c = text[i];
    if (is_space(c)) {
      ++i;
    } else if (c == ';') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (c == '(') {
      std::size_t close = text.find(')', i);
      if (close == std::string_view::npos) {
        throw Error(ErrorCode::UnbalancedParens, "unclosed action at position " + std::to_string(i));
      }
      plan.push_back(parse_action(text.substr(i, close - i + 1)));
      i = close + 1;
    } else {
      throw Error(ErrorCode::SyntaxError,
                  "unexpected text in plan at position " + std::to_string(i));
    }
  }
  return plan;
}

GroundAction parse_action(std::string_view text) {
  std::size_t b = text.find_first_not_of(" \t\r\n");
  std::size_t e = text.find_last_not_of(" \t\r\n");
  if (b == std::string_view::npos || text[b] != '(' || text[e] != ')') {
    throw Error(ErrorCode::SyntaxError, "expected (name args...), got '" + std::string(text) + "'");
  }
  std::string_view inner = text.substr(b + 1, e - b - 1);
  if (inner.find_first_of("()") != std::string_view::npos) {
    throw Error(ErrorCode::SyntaxError, "nested expression in action '" + std::string(text) + "'");
  }
  std::vector<std::string> tokens;
  std::string current;
  for (char c : inner) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  if (tokens.empty()) throw Error(ErrorCode::SyntaxError, "empty action '()'");
  GroundAction action{tokens.front(), {}};
  action.args.assign(tokens.begin() + 1, tokens.end());
  return action;
}

std::string format_plan(const Plan& plan) {
  std::string out;
  for (const GroundAction& a : plan) out += to_string(a) + "\n";
  return out;
}

std::string dump_state(const State& state) {
  std::string out;
  for (const GroundAtom& a : state.atoms) out += to_string(a) + "\n";
  return out;
}

}  // namespace planloop::world
