#include <doctest.h>

#include "regmod/asp.hpp"
#include "regmod/driver.hpp"
#include "regmod/native.hpp"
#include "support.hpp"

using namespace regmod;
using namespace regmod::testing;

namespace {

std::optional<SolverConfig> solver() {
  auto path = find_solver();
  if (!path) return std::nullopt;
  SolverConfig cfg;
  cfg.solver_path = *path;
  cfg.time_limit = 60;
  return cfg;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

const char* kIntroFacts =
    "rule(z,2) rule(s(2),1) rule(s(1),2) odd(1) even(2) plus(2,1,1) plus(1,2,1) plus(1,1,2) plus(2,2,2)";

AnswerSet answer(const std::string& facts) { return parse_answer_set("Answer: 1\n" + facts + "\nSATISFIABLE\n"); }

}  // namespace

TEST_CASE("model-search emission matches the golden files") {
  Problem p = load_fixture("even_odd_plus.smt2");
  CHECK(emit_model_search(p, {2}, false).text == read_file(std::string(REGMOD_SOURCE_DIR) + "/tests/golden/even_odd_plus_2.lp"));
  CHECK(emit_model_search(p, {2}, true).text ==
        read_file(std::string(REGMOD_SOURCE_DIR) + "/tests/golden/even_odd_plus_2_sb.lp"));
}

TEST_CASE("the clause section is the flattened listing") {
  auto lines = lines_of(emit_model_search(load_fixture("even_odd_plus.smt2"), {2}, false).text);
  const std::vector<std::string> listing{
      "#const maxState=2.",
      "state(1..maxState).",
      "1 {rule(s(Q0), Q): state(Q)} 1 :- state(Q0).",
      "{even(Q0)} :- state(Q0).",
      "{odd(Q0)} :- state(Q0).",
      "{plus(Q0, Q1, Q2)} :- state(Q0), state(Q1), state(Q2).",
      "even(Q0) :- rule(z, Q0).",
      "even(Q2) :- odd(Q1), rule(s(Q1), Q2).",
      "odd(Q2) :- even(Q1), rule(s(Q1), Q2).",
      "plus(Q1, Q0, Q0) :- rule(z, Q1), state(Q0).",
      "plus(Q6, Q3, Q7) :- plus(Q1, Q3, Q5), rule(s(Q1), Q6), rule(s(Q5), Q7).",
      ":- even(Q0), even(Q1), plus(Q0, Q1, Q2), odd(Q2).",
  };
  for (const auto& l : listing) {
    CAPTURE(l);
    CHECK(std::count(lines.begin(), lines.end(), l) == 1);
  }
}

TEST_CASE("emission is deterministic and well formed") {
  for (const auto& name : fixture_names()) {
    CAPTURE(name);
    Problem p = load_fixture(name);
    Signature sig(p);
    std::vector<std::size_t> n(sig.sort_count(), 2);
    for (bool sb : {false, true}) {
      std::string a = emit_model_search(p, n, sb).text;
      CHECK(a == emit_model_search(p, n, sb).text);
      CHECK(std::count(a.begin(), a.end(), '(') == std::count(a.begin(), a.end(), ')'));
    }
    std::string c = emit_counterexample_search(p, 2).text;
    CHECK(std::count(c.begin(), c.end(), '(') == std::count(c.begin(), c.end(), ')'));
    for (const auto& line : lines_of(c))
      if (!line.empty()) CHECK(line.back() == '.');
  }
}

TEST_CASE("a problem without goals has no integrity constraints") {
  Problem p = load_fixture("even_odd_plus.smt2");
  p.clauses.pop_back();
  for (const auto& line : lines_of(emit_model_search(p, {2}, false).text)) CHECK(line.rfind(":-", 0) != 0);
}

TEST_CASE("two-sort programs type every state") {
  std::string text = emit_model_search(gen_member_rev(2), {2, 3}).text;
  CHECK(text.find("stateType(1..maxState_elt,elt).") != std::string::npos);
  CHECK(text.find("stateType(1..maxState_list,list).") != std::string::npos);
  CHECK(text.find("#const maxState_list=3.") != std::string::npos);
}

TEST_CASE("a depth-0 counterexample universe holds only constants") {
  std::string text = emit_counterexample_search(load_fixture("even_odd_plus.smt2"), 0).text;
  CHECK(text.find("#const depth=0.") != std::string::npos);
  CHECK(text.find("u(nat,z,0).") != std::string::npos);
}

TEST_CASE("name escaping") {
  Problem p;
  p.sorts.push_back({"Node", {{"state", {}}, {"Leaf", {}}, {"c_Leaf", {}}}});
  p.predicates.push_back({"ok", {"Node"}});
  Signature sig(p);
  NameTable names(sig);
  CHECK(names.sort(0) == "c_Node");
  CHECK(names.ctor(0) == "c_state");
  CHECK(names.ctor(1) == "c_Leaf");
  CHECK(names.ctor(2) != "c_Leaf");
  CHECK(names.pred(0) == "c_ok");
  for (std::size_t c = 0; c < 3; ++c) CHECK(names.ctor_of(names.ctor(c)) == c);
}

TEST_CASE("parse_answer_set") {
  AnswerSet a = answer("rule(z,2) rule(s(2),1) rule(s(1),2) odd(1) even(2)");
  CHECK(a.facts.size() == 5);
  CHECK(a.facts[1].to_string() == "rule(s(2),1)");
  CHECK(a.facts[1].args[0].name == "s");
  CHECK(a.facts[1].args[1].is_number);

  auto spaced = parse_facts("rule(s(1) ,2)  odd( 1 )");
  REQUIRE(spaced.size() == 2);
  CHECK(spaced[0].to_string() == "rule(s(1),2)");

  auto tuple = parse_facts("cex(5,(z,s(z),-3))");
  REQUIRE(tuple.size() == 1);
  CHECK(tuple[0].args[1].name.empty());
  CHECK(tuple[0].args[1].args[2].number == -3);

  AnswerSet noisy = parse_answer_set("clingo version 5\nReading from stdin\nSolving...\nAnswer: 1\nodd(1)\nSATISFIABLE\n");
  CHECK(noisy.facts.size() == 1);

  try {
    parse_answer_set("clingo version 5\nUNSATISFIABLE\n");
    FAIL("expected an error");
  } catch (const AspError& e) {
    CHECK(e.kind() == AspError::Kind::NoAnswerSet);
    CHECK(e.classification() == SolverOutcome::Unsatisfiable);
  }
  CHECK_THROWS_AS(parse_facts("rule(z,"), AspError);
  CHECK_THROWS_AS(parse_facts("rule(z,2))"), AspError);
}

TEST_CASE("decode_model") {
  Problem p = load_fixture("even_odd_plus.smt2");
  auto m = decode_model(answer(kIntroFacts), p);
  auto intro = intro_model(p);
  CHECK(m.automaton == intro.automaton);
  CHECK(m.tables == intro.tables);
  CHECK(check_model(m.automaton, m.tables, p).is_model());

  try {
    decode_model(answer("rule(s(2),1) rule(s(1),2) odd(1) even(2)"), p);
    FAIL("expected an error");
  } catch (const AspError& e) {
    CHECK(e.kind() == AspError::Kind::IncompleteDelta);
  }

  // odd(2) is not supported: even(Q2) :- odd(Q1), rule(s(Q1), Q2) demands even(1).
  try {
    decode_model(answer(std::string(kIntroFacts) + " odd(2)"), p);
    FAIL("expected an error");
  } catch (const AspError& e) {
    CHECK(e.kind() == AspError::Kind::VerificationFailure);
  }
  // Auxiliary atoms of the encoding are skipped; known predicates must match their arity.
  CHECK_NOTHROW(decode_model(answer(std::string(kIntroFacts) + " reach(1,nat)"), p));
  CHECK_THROWS_AS(decode_model(answer(std::string(kIntroFacts) + " even(1,2)"), p), AspError);
}

TEST_CASE("decode_counterexample") {
  Problem p = load_fixture("even_odd_plus.smt2");
  Derivation d = decode_counterexample(answer("cex(5,(z,z,s(z)))"), p);
  CHECK(d.goal == 5);
  CHECK(d.subst.at("x") == z());
  CHECK(d.subst.at("r") == num(1));
}

TEST_CASE("a missing solver is reported") {
  SolverConfig cfg;
  cfg.solver_path = "/nonexistent/solver";
  try {
    run_external(emit_model_search(load_fixture("even_odd_plus.smt2"), {1}), cfg);
    FAIL("expected an error");
  } catch (const AspError& e) {
    CHECK(e.kind() == AspError::Kind::SolverNotFound);
  }
}

TEST_CASE("external solver verdicts on the introductory problem") {
  auto cfg = solver();
  if (!cfg) {
    MESSAGE("no ASP solver found; skipped");
    return;
  }
  Problem p = load_fixture("even_odd_plus.smt2");
  for (bool sb : {false, true}) {
    SolverRun one = run_external(emit_model_search(p, {1}, sb), *cfg);
    CHECK(one.outcome == SolverOutcome::Unsatisfiable);
    SolverRun two = run_external(emit_model_search(p, {2}, sb), *cfg);
    REQUIRE(two.outcome == SolverOutcome::Satisfiable);
    REQUIRE(two.answer);
    auto m = decode_model(*two.answer, p);
    auto intro = intro_model(p);
    CHECK(isomorphic_model(m.automaton, m.tables, intro.automaton, intro.tables));
  }
}

TEST_CASE("counterexample programs agree with the ground oracle") {
  auto cfg = solver();
  if (!cfg) {
    MESSAGE("no ASP solver found; skipped");
    return;
  }
  for (const auto& name : fixture_names()) {
    Problem p = load_fixture(name);
    const std::size_t top = name == "member_rev_2.smt2" ? 2 : 3;
    for (std::size_t d = 0; d <= top; ++d) {
      CAPTURE(name);
      CAPTURE(d);
      bool expected = goal_violated(p, ground_least_model(p, d)).has_value();
      SolverRun run = run_external(emit_counterexample_search(p, d), *cfg);
      REQUIRE(run.outcome != SolverOutcome::Unknown);
      CHECK((run.outcome == SolverOutcome::Satisfiable) == expected);
      if (run.answer) {
        Derivation cex = decode_counterexample(*run.answer, p);
        auto model = ground_least_model(p, d);
        const Clause& goal = p.clauses.at(cex.goal);
        for (const auto& lit : goal.body)
          if (lit.kind == Literal::Kind::Atom) CHECK(model.count(regmod::apply(cex.subst, lit.as_atom())));
      }
    }
  }
}

TEST_CASE("model counts shrink under symmetry breaking") {
  auto cfg = solver();
  if (!cfg) {
    MESSAGE("no ASP solver found; skipped");
    return;
  }
  Problem p = load_fixture("even_odd_plus.smt2");
  ModelCount with = count_models(emit_model_search(p, {2}, true), *cfg);
  ModelCount without = count_models(emit_model_search(p, {2}, false), *cfg);
  CHECK(with.exhaustive);
  CHECK(without.exhaustive);
  CHECK(with.count == 1);
  CHECK(without.count >= with.count);
}
