#include <doctest.h>

#include <random>

#include "support.hpp"

using namespace regmod;
using namespace regmod::testing;

namespace {

TreeAutomaton one_state(const SignaturePtr& sig) {
  TreeAutomaton a(sig, {1});
  a.set_target(0, std::vector<State>{}, 1);
  a.set_target(1, std::vector<State>{1}, 1);
  return a;
}

bool syntactically_true(const Literal& lit, const Substitution& sub) {
  if (lit.kind == Literal::Kind::Atom) return true;
  bool same = regmod::apply(sub, lit.args[0]) == regmod::apply(sub, lit.args[1]);
  return lit.kind == Literal::Kind::Eq ? same : !same;
}

}  // namespace

TEST_CASE("flattening the introductory clauses reproduces the state-variable listing") {
  Problem p = load_fixture("even_odd_plus.smt2");
  Signature sig(p);
  std::vector<std::string> got;
  for (std::size_t i = 0; i < p.clauses.size(); ++i) got.push_back(flatten(p, sig, p.clauses[i], i).to_string(sig));
  std::vector<std::string> expected{
      "even(Q0) :- rule(z, Q0).",
      "even(Q2) :- odd(Q1), rule(s(Q1), Q2).",
      "odd(Q2) :- even(Q1), rule(s(Q1), Q2).",
      "plus(Q1, Q0, Q0) :- rule(z, Q1), stateType(Q0, nat).",
      "plus(Q6, Q3, Q7) :- plus(Q1, Q3, Q5), rule(s(Q1), Q6), rule(s(Q5), Q7).",
      ":- even(Q0), even(Q1), plus(Q0, Q1, Q2), odd(Q2).",
  };
  CHECK(got == expected);
}

TEST_CASE("flatten structure") {
  Problem p = load_fixture("even_odd_plus.smt2");
  Signature sig(p);
  const std::size_t sc = *sig.constructor_index("s"), zc = *sig.constructor_index("z");

  // even(s(X)) :- odd(X), written without an equality.
  Clause c;
  c.vars = {{"X", "nat"}};
  c.head = Atom{"even", {s(Term::var("X", "nat"))}};
  c.body = {Literal::atom("odd", {Term::var("X", "nat")})};
  FlatClause f = flatten(p, c);
  REQUIRE(f.head);
  REQUIRE(f.transitions.size() == 1);
  REQUIRE(f.predicates.size() == 1);
  CHECK(f.transitions[0].ctor == sc);
  CHECK(f.transitions[0].args == f.predicates[0].args);
  CHECK(f.head->args == std::vector<std::size_t>{f.transitions[0].result});
  CHECK(f.generators.empty());

  FlatClause plus = flatten(p, p.clauses[3]);
  REQUIRE(plus.head);
  CHECK(plus.head->args == std::vector<std::size_t>{1, 0, 0});
  REQUIRE(plus.transitions.size() == 1);
  CHECK(plus.transitions[0].ctor == zc);
  CHECK(plus.transitions[0].result == 1);
  CHECK(plus.generators == std::vector<std::size_t>{0});

  FlatClause goal = flatten(p, p.clauses[5]);
  CHECK_FALSE(goal.head);
  CHECK(goal.kind == ClauseKind::Goal);
  CHECK(goal.predicates.size() == 4);
  CHECK(goal.transitions.empty());
}

TEST_CASE("flatten handles disequalities, nested terms and contradictions") {
  Problem p = load_fixture("diseq_irreflexive.smt2");
  FlatClause f = flatten(p, p.clauses[2]);
  CHECK(f.trivially_false);

  Clause c;
  c.kind = ClauseKind::Goal;
  c.vars = {{"x", "nat"}, {"y", "nat"}};
  Term x = Term::var("x", "nat"), y = Term::var("y", "nat");
  c.body = {Literal::diseq(s(x), s(y))};
  FlatClause g = flatten(p, c);
  CHECK_FALSE(g.trivially_false);
  CHECK(g.transitions.size() == 2);
  CHECK(g.disequalities.size() == 1);
  CHECK(g.generators.empty());

  Clause e = c;
  e.body = {Literal::eq(x, y), Literal::diseq(s(x), s(y))};
  // s(x) and s(y) stay distinct variables; only x and y merge.
  FlatClause h = flatten(p, e);
  CHECK(h.equalities.size() == 1);
  CHECK_FALSE(h.trivially_false);
}

TEST_CASE("least tables of the introductory automaton") {
  Problem p = load_fixture("even_odd_plus.smt2");
  auto m = intro_model(p);
  PredicateTables t = least_tables(m.automaton, p);
  CHECK(t == m.tables);
}

TEST_CASE("least tables of the one-state automaton") {
  Problem p = load_fixture("even_odd_plus.smt2");
  auto sig = std::make_shared<const Signature>(p);
  PredicateTables t = least_tables(one_state(sig), p);
  PredicateTables expected(sig, {1});
  expected.insert(0, std::vector<State>{1});
  expected.insert(1, std::vector<State>{1});
  expected.insert(2, std::vector<State>{1, 1, 1});
  CHECK(t == expected);
}

TEST_CASE("least tables without definite clauses are empty") {
  Problem p = load_fixture("even_odd_plus.smt2");
  p.clauses.erase(p.clauses.begin(), p.clauses.begin() + 5);
  auto m = intro_model(p);
  CHECK(least_tables(m.automaton, p).size() == 0);
}

TEST_CASE("check_model verdicts") {
  Problem p = load_fixture("even_odd_plus.smt2");
  auto m = intro_model(p);
  FlatProgram prog(p, m.sig);
  CHECK(check_model(m.automaton, m.tables, p).is_model());

  TreeAutomaton a1 = one_state(m.sig);
  PredicateTables t1 = least_tables(a1, p);
  Verdict v = check_model(a1, t1, prog);
  REQUIRE(v.witness);
  CHECK(v.witness->reason == Verdict::Reason::GoalViolation);
  CHECK(v.witness->clause == 5);
  CHECK(v.witness->assignment == StateAssignment{1, 1, 1});
  CHECK(witness_holds(a1, t1, prog, *v.witness));

  PredicateTables broken = m.tables;
  broken.erase(1, std::vector<State>{1});
  Verdict vb = check_model(m.automaton, broken, prog);
  REQUIRE(vb.witness);
  CHECK(vb.witness->reason == Verdict::Reason::ClosureViolation);
  CHECK(vb.witness->clause == 2);
  CHECK(witness_holds(m.automaton, broken, prog, *vb.witness));
  CHECK_FALSE(witness_holds(m.automaton, m.tables, prog, *vb.witness));
}

TEST_CASE("interpret_atom on the introductory model") {
  Problem p = load_fixture("even_odd_plus.smt2");
  auto m = intro_model(p);
  CHECK(interpret_atom(m.automaton, m.tables, Atom{"even", {num(2)}}));
  CHECK(interpret_atom(m.automaton, m.tables, Atom{"odd", {num(1)}}));
  CHECK(interpret_atom(m.automaton, m.tables, Atom{"plus", {num(1), num(1), z()}}));
  CHECK_FALSE(interpret_atom(m.automaton, m.tables, Atom{"odd", {z()}}));
}

TEST_CASE("least tables are minimal") {
  Problem p = load_fixture("even_odd_plus.smt2");
  auto m = intro_model(p);
  FlatProgram prog(p, m.sig);
  PredicateTables least = least_tables(m.automaton, prog);
  for (std::size_t pred = 0; pred < m.sig->predicates().size(); ++pred)
    for (const auto& tup : least.tuples(pred)) {
      PredicateTables smaller = least;
      smaller.erase(pred, tup);
      Verdict v = check_model(m.automaton, smaller, prog);
      REQUIRE(v.witness);
      CHECK(v.witness->reason == Verdict::Reason::ClosureViolation);
    }
}

TEST_CASE("goal violations persist in every superset of the least tables") {
  std::mt19937 rng(3);
  for (const std::string name : {"even_odd_plus.smt2", "even_not_odd.smt2", "member_rev_2.smt2", "color_list.smt2"}) {
    CAPTURE(name);
    Problem p = load_fixture(name);
    auto sig = std::make_shared<const Signature>(p);
    FlatProgram prog(p, sig);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<std::size_t> counts(sig->sort_count());
      for (auto& n : counts) n = 1 + rng() % 2;
      TreeAutomaton a = random_automaton(sig, counts, rng);
      PredicateTables least = least_tables(a, prog);
      auto inh = inhabitation(a);
      if (!find_goal_violation(a, least, inh, prog)) continue;
      for (int sup = 0; sup < 5; ++sup) {
        PredicateTables bigger = least;
        for (std::size_t pred = 0; pred < sig->predicates().size(); ++pred)
          for (int k = 0; k < 4; ++k) {
            std::vector<State> tup;
            for (auto s : sig->predicate(pred).args) tup.push_back(static_cast<State>(1 + rng() % counts[s]));
            bigger.insert(pred, tup);
          }
        CHECK(find_goal_violation(a, bigger, inh, prog));
      }
    }
  }
}

TEST_CASE("ground body instances map to flat body matches") {
  std::mt19937 rng(9);
  for (const auto& name : fixture_names()) {
    CAPTURE(name);
    Problem p = load_fixture(name);
    auto sig = std::make_shared<const Signature>(p);
    FlatProgram prog(p, sig);
    std::vector<const FlatProgram::Entry*> entries;
    for (const auto& e : prog.definite()) entries.push_back(&e);
    for (const auto& e : prog.goals()) entries.push_back(&e);
    for (int trial = 0; trial < 4; ++trial) {
      std::vector<std::size_t> counts(sig->sort_count());
      for (auto& n : counts) n = 1 + rng() % 3;
      TreeAutomaton a = random_automaton(sig, counts, rng);
      auto inh = inhabitation(a);
      for (const auto* entry : entries) {
        const Clause& clause = p.clauses[entry->clause.source];
        std::vector<std::vector<Term>> pools;
        for (const auto& v : clause.vars) pools.push_back(terms_upto(p, v.sort, 2));
        for (int sample = 0; sample < 60; ++sample) {
          Substitution sub;
          for (std::size_t k = 0; k < clause.vars.size(); ++k)
            sub[clause.vars[k].name] = pools[k][rng() % pools[k].size()];
          bool holds = std::all_of(clause.body.begin(), clause.body.end(),
                                   [&](const Literal& l) { return syntactically_true(l, sub); });
          if (!holds) continue;
          PredicateTables tables(sig, counts);
          for (const auto& lit : clause.body) {
            if (lit.kind != Literal::Kind::Atom) continue;
            std::vector<State> tup;
            for (const auto& t : lit.args) tup.push_back(run_term(a, regmod::apply(sub, t)));
            tables.insert(*sig->predicate_index(lit.predicate), tup);
          }
          bool matched = false;
          for_each_body_match(*entry, a, tables, inh, [&](const StateAssignment&) {
            matched = true;
            return false;
          });
          CHECK(matched);
        }
      }
    }
  }
}

TEST_CASE("check_model verdicts are sound against ground models") {
  Problem p = load_fixture("even_odd_plus.smt2");
  auto m = intro_model(p);
  for (std::size_t d = 0; d <= 4; ++d)
    for (const auto& atom : ground_least_model(p, d)) CHECK(interpret_atom(m.automaton, m.tables, atom));
}
