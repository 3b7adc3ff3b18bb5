#include <doctest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <random>

#include "planloop/error.hpp"
#include "planloop/pddl.hpp"
#include "support.hpp"

using namespace planloop;
using namespace planloop::pddl;

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

std::vector<std::string> corpus_pddl(std::string_view suffix) {
  std::vector<std::string> out;
  for (const auto& e : corpus::entries()) {
    std::string path(e.path);
    if (path.rfind("pddl/", 0) == 0 && path.ends_with(suffix)) out.push_back(path);
  }
  return out;
}

std::string domain_for(const std::string& problem_path) {
  for (const std::string& kind : testing::kinds()) {
    if (problem_path.find("/" + kind + "/") != std::string::npos) return testing::domain_text(kind);
  }
  FAIL("no family for " << problem_path);
  return {};
}

}  // namespace

TEST_CASE("normalize_source fixes glued type hyphens, case and whitespace") {
  CHECK(normalize_source("(holding ?i -ingredient)") == "(holding ?i - ingredient)");
  CHECK(normalize_source("(on-table b1)") == "(on-table b1)");
  CHECK(normalize_source("(AND (Clear ?X))") == "(and (clear ?x))");
  CHECK(normalize_source("(a ; note\n  b)\t") == "(a b)");
}

TEST_CASE("normalize_source is idempotent on random text") {
  const std::string alphabet = "()?-; \n\tabAB01xyz-";
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string text;
    std::size_t len = rng() % 40;
    for (std::size_t i = 0; i < len; ++i) text += alphabet[rng() % alphabet.size()];
    std::string once = normalize_source(text);
    CHECK(normalize_source(once) == once);
  }
}

TEST_CASE("appendix domains parse with the expected structure") {
  DomainDef blocks = parse_domain(testing::domain_text("blocksworld"));
  CHECK(blocks.name == "blocksworld");
  CHECK(blocks.predicates.size() == 5);
  std::vector<std::string> names;
  for (const auto& a : blocks.actions) names.push_back(a.name);
  std::sort(names.begin(), names.end());
  CHECK(names == std::vector<std::string>{"pickup", "putdown", "stack", "unstack"});

  DomainDef cooking = parse_domain(testing::domain_text("cooking"));
  CHECK(cooking.actions.size() == 3);
  CHECK(cooking.types == std::vector<std::string>{"pot", "ingredient"});
  const ActionSchema* add = cooking.find_action("add");
  REQUIRE(add != nullptr);
  REQUIRE(add->params.size() == 2);
  CHECK(add->params[0].name == "i");
  CHECK(add->params[0].type == "ingredient");
  CHECK(add->params[0].variable);
  CHECK(add->params[1].type == "pot");

  // Untyped parameters get the implicit type.
  const ActionSchema* stack = blocks.find_action("stack");
  REQUIRE(stack != nullptr);
  CHECK(stack->params[0].type == "object");
}

TEST_CASE("empty domain") {
  DomainDef d = parse_domain("(define (domain x) (:predicates) )");
  CHECK(d.name == "x");
  CHECK(d.actions.empty());
  CHECK(d.predicates.empty());
}

TEST_CASE("appendix problems parse") {
  DomainDef blocks = parse_domain(testing::domain_text("blocksworld"));
  ProblemDef three = parse_problem(corpus::get("pddl/blocksworld/example1.problem.pddl"), blocks);
  CHECK(three.name == "threeblocks");
  CHECK(three.init.size() == 6);
  CHECK(three.goal.size() == 3);

  DomainDef balls = parse_domain(testing::domain_text("ballmoving"));
  ProblemDef threeballs = parse_problem(corpus::get("pddl/ballmoving/example1.problem.pddl"), balls);
  CHECK(threeballs.name == "threeballs");
  std::map<std::string, int> by_type;
  for (const auto& o : threeballs.objects) ++by_type[o.type];
  CHECK(by_type["robot"] == 1);
  CHECK(by_type["room"] == 4);
  CHECK(by_type["ball"] == 3);
}

TEST_CASE("domain errors") {
  CHECK(code_of([] { parse_domain("(define (domain x) (:predicates (p))"); }) == ErrorCode::UnbalancedParens);
  CHECK(code_of([] { parse_domain("(define (domain x) (:requirements :strips) (:predicates))"); }) ==
        ErrorCode::UnknownSection);
  CHECK(code_of([] {
          parse_domain(
              "(define (domain x) (:predicates (p)) (:action a :parameters () :precondition (p) :effect (not (p)))"
              " (:action a :parameters () :precondition (p) :effect (not (p))))");
        }) == ErrorCode::DuplicateAction);
  CHECK(code_of([] { parse_domain("(define (domain x) (:predicates (p ?a - thing)))"); }) ==
        ErrorCode::UndeclaredType);
  CHECK(code_of([] {
          parse_domain("(define (domain x) (:predicates (p ?a)) (:action a :parameters (?a) :precondition (p ?a ?a)"
                       " :effect (p ?a)))");
        }) == ErrorCode::ArityError);
  CHECK(code_of([] {
          parse_domain("(define (domain x) (:predicates (p ?a)) (:action a :parameters (?a) :precondition (p ?b)"
                       " :effect (p ?a)))");
        }) == ErrorCode::UndeclaredVariable);
  CHECK(code_of([] {
          parse_domain("(define (domain x) (:predicates (p ?a)) (:action a :parameters (?a ?a) :precondition (p ?a)"
                       " :effect (p ?a)))");
        }) == ErrorCode::DuplicateParameter);
  CHECK(code_of([] { parse_domain("(define (domain x) (:predicates (p) (p)))"); }) ==
        ErrorCode::DuplicatePredicate);
}

TEST_CASE("unbalanced input reports the position") {
  try {
    parse_domain("(define (domain x)) )");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnbalancedParens);
    CHECK(e.detail().find("position") != std::string::npos);
  }
}

TEST_CASE("problem errors") {
  DomainDef blocks = parse_domain(testing::domain_text("blocksworld"));
  auto problem = [](const std::string& init, const std::string& goal) {
    return "(define (problem p) (:domain blocksworld) (:objects b1 b2) (:init " + init + ") (:goal (and " + goal +
           ")))";
  };
  CHECK(code_of([&] { parse_problem(problem("(flying b1)", "(on b1 b2)"), blocks); }) ==
        ErrorCode::UnknownPredicate);
  CHECK(code_of([&] { parse_problem(problem("(on b1 b3)", "(on b1 b2)"), blocks); }) ==
        ErrorCode::UndeclaredObject);
  CHECK(code_of([&] { parse_problem(problem("(on b1 ?x)", "(on b1 b2)"), blocks); }) ==
        ErrorCode::NonGroundAtom);
  CHECK(code_of([&] { parse_problem(problem("(on b1 b2)", "(not (on b1 b2))"), blocks); }) ==
        ErrorCode::NegativeGoal);
  CHECK(code_of([&] { parse_problem(problem("(on b1)", "(on b1 b2)"), blocks); }) == ErrorCode::ArityError);
  CHECK(code_of([&] {
          parse_problem("(define (problem p) (:domain cooking) (:objects) (:init) (:goal (and)))", blocks);
        }) == ErrorCode::DomainMismatch);
}

TEST_CASE("every corpus file round-trips through the printer") {
  for (const std::string& path : corpus_pddl(".domain.pddl")) {
    CAPTURE(path);
    DomainDef once = parse_domain(corpus::get(path));
    std::string printed = print_domain(once);
    DomainDef twice = parse_domain(printed);
    CHECK(twice == once);
    CHECK(print_domain(twice) == printed);
  }
  std::size_t problems = 0;
  for (const std::string& path : corpus_pddl(".problem.pddl")) {
    CAPTURE(path);
    DomainDef domain = parse_domain(domain_for(path));
    ProblemDef once = parse_problem(corpus::get(path), domain);
    std::string printed = print_problem(once);
    ProblemDef twice = parse_problem(printed, domain);
    CHECK(twice == once);
    CHECK(print_problem(twice) == printed);
    ++problems;
  }
  CHECK(problems >= 9);
}

TEST_CASE("deleting any closing paren of a fixture is rejected") {
  for (const std::string& path : corpus_pddl(".pddl")) {
    std::string text(corpus::get(path));
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] != ')') continue;
      std::string broken = text.substr(0, i) + text.substr(i + 1);
      CAPTURE(path);
      CAPTURE(i);
      ErrorCode code = path.ends_with(".domain.pddl")
                           ? code_of([&] { parse_domain(broken); })
                           : code_of([&] { parse_problem(broken, parse_domain(domain_for(path))); });
      CHECK(code == ErrorCode::UnbalancedParens);
    }
  }
}

TEST_CASE("atoms that survive parsing match their declared arity") {
  for (const auto& instance : testing::sample_instances(60, 3)) {
    DomainDef d = parse_domain(instance.domain_text);
    ProblemDef p = parse_problem(instance.problem_text, d);
    for (const auto& a : d.actions) {
      for (const auto* list : {&a.precondition, &a.effects}) {
        for (const Literal& l : *list) CHECK(l.atom.args.size() == d.find_predicate(l.atom.predicate)->params.size());
      }
    }
    for (const auto* list : {&p.init, &p.goal}) {
      for (const Atom& atom : *list) CHECK(atom.args.size() == d.find_predicate(atom.predicate)->params.size());
    }
    CHECK(parse_problem(print_problem(p), d) == p);
  }
}

TEST_CASE("printing is deterministic and typed lists are grouped") {
  DomainDef cooking = parse_domain(testing::domain_text("cooking"));
  DomainDef copy = parse_domain(print_domain(cooking));
  CHECK(print_domain(copy) == print_domain(cooking));
  ProblemDef p = parse_problem(corpus::get("pddl/cooking/example1.problem.pddl"), cooking);
  std::string printed = print_problem(p);
  CHECK(printed.find("pot1 pot2 pot3 - pot") != std::string::npos);
  CHECK(printed.find("(holding ?i - ingredient)") == std::string::npos);
  CHECK(print_domain(cooking).find("(holding ?i)") != std::string::npos);
}

TEST_CASE("type annotations inside action atoms are dropped") {
  DomainDef d = parse_domain(
      "(define (domain k) (:types ingredient) (:predicates (holding ?i - ingredient))"
      " (:action pick :parameters (?i - ingredient) :precondition (and) :effect (holding ?i -ingredient)))");
  REQUIRE(d.actions.size() == 1);
  CHECK(d.actions[0].effects.size() == 1);
  CHECK(to_string(d.actions[0].effects[0]) == "(holding ?i)");
}
