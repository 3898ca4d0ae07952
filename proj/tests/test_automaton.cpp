#include <doctest.h>

#include <random>

#include "support.hpp"

using namespace regmod;
using namespace regmod::testing;

namespace {

Problem one_constant() {
  Problem p;
  p.sorts.push_back({"u", {{"c", {}}}});
  return p;
}

/// Saturated count of distinct terms reaching each state, from an explicit
/// term list.
std::vector<Cardinality> brute_classes(const TreeAutomaton& a, const std::vector<Term>& terms, std::size_t sort) {
  std::vector<int> seen(a.state_count(sort), 0);
  for (const auto& t : terms) ++seen[run_term(a, t) - 1];
  std::vector<Cardinality> out;
  for (int n : seen) out.push_back(n == 0 ? Cardinality::Empty : n == 1 ? Cardinality::One : Cardinality::Many);
  return out;
}

}  // namespace

TEST_CASE("run_term on the introductory automaton") {
  auto m = intro_model(load_fixture("even_odd_plus.smt2"));
  CHECK(run_term(m.automaton, z()) == 2);
  CHECK(run_term(m.automaton, num(1)) == 1);
  CHECK(run_term(m.automaton, num(3)) == 1);
  CHECK(run_term(m.automaton, num(4)) == 2);
  CHECK(run_term(m.automaton, num(7)) == run_term(m.automaton, num(7)));
  CHECK_THROWS_AS(run_term(m.automaton, Term::var("x", "nat")), std::invalid_argument);
  CHECK_THROWS_AS(run_term(m.automaton, Term::app("nil")), std::invalid_argument);
}

TEST_CASE("check_automaton") {
  auto m = intro_model(load_fixture("even_odd_plus.smt2"));
  CHECK(check_automaton(m.automaton).empty());

  TreeAutomaton missing = m.automaton;
  missing.clear_target(*m.sig->constructor_index("s"), std::vector<State>{2});
  auto issues = check_automaton(missing);
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].kind == AutomatonIssue::Kind::Incomplete);
  CHECK_THROWS_AS(run_term(missing, num(1)), std::logic_error);

  TreeAutomaton wild = m.automaton;
  wild.set_target(*m.sig->constructor_index("z"), std::vector<State>{}, 5);
  issues = check_automaton(wild);
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].kind == AutomatonIssue::Kind::OutOfRange);
}

TEST_CASE("inhabitation classes") {
  auto m = intro_model(load_fixture("even_odd_plus.smt2"));
  auto inh = inhabitation(m.automaton);
  CHECK(inh.of(0, 1) == Cardinality::Many);
  CHECK(inh.of(0, 2) == Cardinality::Many);

  auto sig1 = std::make_shared<const Signature>(one_constant());
  TreeAutomaton c(sig1, {1});
  c.set_target(0, std::vector<State>{}, 1);
  CHECK(inhabitation(c).of(0, 1) == Cardinality::One);

  TreeAutomaton sink(m.sig, {2});
  sink.set_target(0, std::vector<State>{}, 1);
  sink.set_target(1, std::vector<State>{1}, 1);
  sink.set_target(1, std::vector<State>{2}, 1);
  auto inh2 = inhabitation(sink);
  CHECK(inh2.of(0, 2) == Cardinality::Empty);
  CHECK(inh2.of(0, 1) == Cardinality::Many);
}

TEST_CASE("diff_approx") {
  auto m = intro_model(load_fixture("even_odd_plus.smt2"));
  CHECK(diff_approx(m.automaton, 0, 1, 2));
  CHECK(diff_approx(m.automaton, 0, 1, 1));
  CHECK(diff_approx(m.automaton, 0, 2, 2));

  auto sig1 = std::make_shared<const Signature>(one_constant());
  TreeAutomaton c(sig1, {1});
  c.set_target(0, std::vector<State>{}, 1);
  CHECK_FALSE(diff_approx(c, 0, 1, 1));
}

TEST_CASE("sample_language") {
  auto m = intro_model(load_fixture("even_odd_plus.smt2"));
  CHECK(sample_language(m.automaton, 0, 2, 2) == std::vector<Term>{z(), num(2)});
  CHECK(sample_language(m.automaton, 0, 1, 1) == std::vector<Term>{num(1)});
  CHECK(sample_language(m.automaton, 0, 1, 3) == std::vector<Term>{num(1), num(3), num(5)});

  TreeAutomaton sink(m.sig, {2});
  sink.set_target(0, std::vector<State>{}, 1);
  sink.set_target(1, std::vector<State>{1}, 1);
  sink.set_target(1, std::vector<State>{2}, 1);
  CHECK(sample_language(sink, 0, 2, 5).empty());

  auto sig1 = std::make_shared<const Signature>(one_constant());
  TreeAutomaton c(sig1, {1});
  c.set_target(0, std::vector<State>{}, 1);
  CHECK(sample_language(c, 0, 1, 3) == std::vector<Term>{Term::app("c")});

  Problem colors = load_fixture("color_list.smt2");
  auto sigc = std::make_shared<const Signature>(colors);
  TreeAutomaton two(sigc, {1, 1});
  for (const auto& [ctor, args] : slots(two)) two.set_target(ctor, args, 1);
  CHECK(sample_language(two, *sigc->sort_index("color"), 1, 5).size() == 2);
}

TEST_CASE("sampled languages are recognized, ordered and pairwise disjoint") {
  std::mt19937 rng(11);
  for (const std::string name : {"even_odd_plus.smt2", "color_list.smt2", "member_rev_2.smt2"}) {
    CAPTURE(name);
    Problem p = load_fixture(name);
    auto sig = std::make_shared<const Signature>(p);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<std::size_t> counts(sig->sort_count());
      for (auto& n : counts) n = 1 + rng() % 3;
      TreeAutomaton a = random_automaton(sig, counts, rng);
      for (std::size_t s = 0; s < sig->sort_count(); ++s) {
        std::set<Term> all;
        std::size_t total = 0;
        for (State q = 1; q <= counts[s]; ++q) {
          auto sample = sample_language(a, s, q, 4);
          CHECK(sample.empty() == !inhabitation(a).inhabited(s, q));
          for (std::size_t i = 0; i < sample.size(); ++i) {
            CHECK(run_term(a, sample[i]) == q);
            if (i > 0) CHECK(sample[i - 1].depth() <= sample[i].depth());
          }
          all.insert(sample.begin(), sample.end());
          total += sample.size();
        }
        CHECK(all.size() == total);
      }
    }
  }
}

TEST_CASE("inhabitation agrees with brute-force term counting") {
  struct Case {
    const char* fixture;
    std::size_t depth;
  };
  for (auto [cname, depth] : {Case{"even_odd_plus.smt2", 6}, Case{"member_rev_2.smt2", 5}}) {
    const std::string name = cname;
    CAPTURE(name);
    Problem p = load_fixture(name);
    auto sig = std::make_shared<const Signature>(p);
    std::vector<std::vector<Term>> terms;
    for (std::size_t s = 0; s < sig->sort_count(); ++s) terms.push_back(terms_upto(p, sig->sort_name(s), depth));
    std::vector<std::vector<std::size_t>> shapes;
    if (sig->sort_count() == 1)
      shapes = {{1}, {2}, {3}};
    else
      shapes = {{1, 1}, {1, 2}, {2, 2}, {2, 3}, {1, 3}};
    std::size_t checked = 0;
    for (const auto& counts : shapes) {
      auto all = raw_automata(sig, counts);
      // Larger spaces are sampled with a fixed stride.
      const std::size_t stride = std::max<std::size_t>(1, all.size() / 400);
      for (std::size_t i = 0; i < all.size(); i += stride) {
        auto inh = inhabitation(all[i]);
        for (std::size_t s = 0; s < sig->sort_count(); ++s) {
          auto brute = brute_classes(all[i], terms[s], s);
          for (State q = 1; q <= counts[s]; ++q) CHECK(inh.of(s, q) == brute[q - 1]);
        }
        ++checked;
      }
    }
    MESSAGE(name << ": " << checked << " automata");
  }
}

TEST_CASE("diff_approx is sound and witnessed") {
  std::mt19937 rng(5);
  for (const std::string name : {"even_odd_plus.smt2", "member_rev_2.smt2"}) {
    Problem p = load_fixture(name);
    auto sig = std::make_shared<const Signature>(p);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<std::size_t> counts(sig->sort_count());
      for (auto& n : counts) n = 1 + rng() % 3;
      TreeAutomaton a = random_automaton(sig, counts, rng);
      for (std::size_t s = 0; s < sig->sort_count(); ++s) {
        auto terms = terms_upto(p, sig->sort_name(s), 3);
        for (const auto& t1 : terms)
          for (const auto& t2 : terms)
            if (!(t1 == t2)) CHECK(diff_approx(a, s, run_term(a, t1), run_term(a, t2)));
        for (State q1 = 1; q1 <= counts[s]; ++q1)
          for (State q2 = 1; q2 <= counts[s]; ++q2) {
            if (!diff_approx(a, s, q1, q2)) continue;
            auto l1 = sample_language(a, s, q1, 2), l2 = sample_language(a, s, q2, 2);
            bool witnessed = false;
            for (const auto& t1 : l1)
              for (const auto& t2 : l2) witnessed = witnessed || !(t1 == t2);
            CHECK(witnessed);
          }
      }
    }
  }
}

TEST_CASE("trim drops uninhabited states and restricts tables") {
  Problem p = load_fixture("even_odd_plus.smt2");
  auto sig = std::make_shared<const Signature>(p);
  TreeAutomaton a(sig, {3});
  a.set_target(0, std::vector<State>{}, 3);
  a.set_target(1, std::vector<State>{3}, 3);
  a.set_target(1, std::vector<State>{1}, 2);
  a.set_target(1, std::vector<State>{2}, 1);
  PredicateTables t(sig, {3});
  t.insert(0, std::vector<State>{3});
  t.insert(1, std::vector<State>{2});
  auto [ta, tt] = trim(a, t);
  CHECK(ta.state_count(0) == 1);
  CHECK(ta.target(0, std::vector<State>{}) == 1);
  CHECK(ta.target(1, std::vector<State>{1}) == 1);
  CHECK(tt.contains(0, std::vector<State>{1}));
  CHECK(tt.size() == 1);
}

TEST_CASE("rendering in the two-column style") {
  auto m = intro_model(load_fixture("even_odd_plus.smt2"));
  auto lines = transition_lines(m.automaton);
  CHECK(lines == std::vector<std::string>{"Z -> 2", "S(1) -> 2", "S(2) -> 1"});
  auto preds = predicate_lines(m.tables, *m.sig);
  CHECK(std::find(preds.begin(), preds.end(), "odd(1)") != preds.end());
  CHECK(std::find(preds.begin(), preds.end(), "plus(2,2,2)") != preds.end());
  std::string text = render_model(m.automaton, m.tables);
  CHECK(text.find("ADT Transitions:") != std::string::npos);
  CHECK(text.find("Predicates:") != std::string::npos);
  CHECK(text.find("Z -> 2") != std::string::npos);
}
