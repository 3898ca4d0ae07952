#pragma once

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "regmod/automaton.hpp"
#include "regmod/chc.hpp"
#include "regmod/frontend.hpp"
#include "regmod/interpretation.hpp"

#ifndef REGMOD_SOURCE_DIR
#define REGMOD_SOURCE_DIR "."
#endif

namespace regmod::testing {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::string fixture_path(const std::string& name) {
  return std::string(REGMOD_SOURCE_DIR) + "/fixtures/" + name;
}

inline Problem load_fixture(const std::string& name) { return parse_problem(read_file(fixture_path(name))); }

inline std::vector<std::string> fixture_names() {
  return {"even_odd_plus.smt2", "even_unsat.smt2",   "diseq_irreflexive.smt2", "even_not_odd.smt2",
          "odd_unsat.smt2",     "lt_irreflexive.smt2", "color_list.smt2",        "member_rev_2.smt2"};
}

inline Term z() { return Term::app("z"); }
inline Term s(Term t) { return Term::app("s", {std::move(t)}); }
inline Term num(int n) { return n == 0 ? z() : s(num(n - 1)); }

/// The 2-state automaton of the introductory example: z -> 2, s(2) -> 1,
/// s(1) -> 2, with odd = {1}, even = {2} and the four plus tuples.
struct IntroModel {
  SignaturePtr sig;
  TreeAutomaton automaton;
  PredicateTables tables;
};

inline IntroModel intro_model(const Problem& problem) {
  auto sig = std::make_shared<const Signature>(problem);
  TreeAutomaton a(sig, {2});
  const std::size_t zc = *sig->constructor_index("z");
  const std::size_t sc = *sig->constructor_index("s");
  a.set_target(zc, std::vector<State>{}, 2);
  a.set_target(sc, std::vector<State>{2}, 1);
  a.set_target(sc, std::vector<State>{1}, 2);
  PredicateTables t(sig, {2});
  const std::size_t even = *sig->predicate_index("even");
  const std::size_t odd = *sig->predicate_index("odd");
  const std::size_t plus = *sig->predicate_index("plus");
  t.insert(odd, std::vector<State>{1});
  t.insert(even, std::vector<State>{2});
  for (auto tup : std::vector<std::vector<State>>{{2, 1, 1}, {1, 2, 1}, {1, 1, 2}, {2, 2, 2}}) t.insert(plus, tup);
  return {sig, std::move(a), std::move(t)};
}

/// All (ctor, args) slots over the live states.
inline std::vector<std::pair<std::size_t, std::vector<State>>> slots(const TreeAutomaton& a) {
  std::vector<std::pair<std::size_t, std::vector<State>>> out;
  for (std::size_t c = 0; c < a.signature().constructors().size(); ++c)
    a.for_each_slot(c, [&](std::span<const State> args) { out.emplace_back(c, std::vector<State>(args.begin(), args.end())); });
  return out;
}

/// Brute-force isomorphism oracle: some per-sort permutation maps a onto b.
inline bool isomorphic(const TreeAutomaton& a, const TreeAutomaton& b) {
  if (a.state_counts() != b.state_counts()) return false;
  const auto& sig = a.signature();
  const std::size_t ns = sig.sort_count();
  std::vector<std::vector<State>> perm(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    perm[s].resize(a.state_count(s));
    std::iota(perm[s].begin(), perm[s].end(), State{1});
  }
  auto matches = [&] {
    for (const auto& [c, args] : slots(a)) {
      const auto& ctor = sig.constructor(c);
      std::vector<State> mapped(args.size());
      for (std::size_t k = 0; k < args.size(); ++k) mapped[k] = perm[ctor.args[k]][args[k] - 1];
      if (perm[ctor.sort][a.target(c, args) - 1] != b.target(c, mapped)) return false;
    }
    return true;
  };
  // Odometer over the product of per-sort permutations.
  std::function<bool(std::size_t)> rec = [&](std::size_t s) -> bool {
    if (s == ns) return matches();
    std::sort(perm[s].begin(), perm[s].end());
    do {
      if (rec(s + 1)) return true;
    } while (std::next_permutation(perm[s].begin(), perm[s].end()));
    return false;
  };
  return rec(0);
}

/// Same, and the tables correspond under the same permutation.
inline bool isomorphic_model(const TreeAutomaton& a, const PredicateTables& ta, const TreeAutomaton& b,
                             const PredicateTables& tb) {
  if (a.state_counts() != b.state_counts()) return false;
  const auto& sig = a.signature();
  const std::size_t ns = sig.sort_count();
  std::vector<std::vector<State>> perm(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    perm[s].resize(a.state_count(s));
    std::iota(perm[s].begin(), perm[s].end(), State{1});
  }
  auto matches = [&] {
    for (const auto& [c, args] : slots(a)) {
      const auto& ctor = sig.constructor(c);
      std::vector<State> mapped(args.size());
      for (std::size_t k = 0; k < args.size(); ++k) mapped[k] = perm[ctor.args[k]][args[k] - 1];
      if (perm[ctor.sort][a.target(c, args) - 1] != b.target(c, mapped)) return false;
    }
    for (std::size_t p = 0; p < sig.predicates().size(); ++p) {
      if (ta.tuples(p).size() != tb.tuples(p).size()) return false;
      for (const auto& tup : ta.tuples(p)) {
        std::vector<State> mapped(tup.size());
        for (std::size_t k = 0; k < tup.size(); ++k) mapped[k] = perm[sig.predicate(p).args[k]][tup[k] - 1];
        if (!tb.contains(p, mapped)) return false;
      }
    }
    return true;
  };
  std::function<bool(std::size_t)> rec = [&](std::size_t s) -> bool {
    if (s == ns) return matches();
    std::sort(perm[s].begin(), perm[s].end());
    do {
      if (rec(s + 1)) return true;
    } while (std::next_permutation(perm[s].begin(), perm[s].end()));
    return false;
  };
  return rec(0);
}

/// Every total map with exactly `n` states for a single-sort signature.
inline std::vector<TreeAutomaton> raw_automata(const SignaturePtr& sig, std::vector<std::size_t> counts) {
  std::vector<TreeAutomaton> out;
  TreeAutomaton a(sig, counts);
  auto sl = slots(a);
  std::vector<State> choice(sl.size(), 1);
  while (true) {
    for (std::size_t i = 0; i < sl.size(); ++i) a.set_target(sl[i].first, sl[i].second, choice[i]);
    out.push_back(a);
    std::size_t i = 0;
    for (; i < sl.size(); ++i) {
      const std::size_t sort = sig->constructor(sl[i].first).sort;
      if (choice[i] < counts[sort]) {
        ++choice[i];
        break;
      }
      choice[i] = 1;
    }
    if (i == sl.size()) break;
  }
  return out;
}

inline bool trim_automaton(const TreeAutomaton& a) {
  Inhabitation inh = inhabitation(a);
  for (std::size_t s = 0; s < a.signature().sort_count(); ++s)
    for (State q = 1; q <= a.state_count(s); ++q)
      if (!inh.inhabited(s, q)) return false;
  return true;
}

/// Ground terms of a sort up to a depth, by direct recursion (independent of
/// the library's Universe).
inline std::vector<Term> terms_upto(const Problem& p, const std::string& sort, std::size_t depth) {
  std::vector<Term> out;
  const SortDecl* sd = p.find_sort(sort);
  for (const auto& c : sd->constructors) {
    if (c.arg_sorts.empty()) {
      out.push_back(Term::app(c.name));
      continue;
    }
    if (depth == 0) continue;
    std::vector<std::vector<Term>> pools;
    for (const auto& a : c.arg_sorts) pools.push_back(terms_upto(p, a, depth - 1));
    std::vector<std::size_t> idx(pools.size(), 0);
    bool empty = std::any_of(pools.begin(), pools.end(), [](const auto& v) { return v.empty(); });
    while (!empty) {
      std::vector<Term> args;
      for (std::size_t k = 0; k < pools.size(); ++k) args.push_back(pools[k][idx[k]]);
      out.push_back(Term::app(c.name, std::move(args)));
      std::size_t k = 0;
      for (; k < pools.size(); ++k) {
        if (++idx[k] < pools[k].size()) break;
        idx[k] = 0;
      }
      if (k == pools.size()) break;
    }
  }
  return out;
}

}  // namespace regmod::testing

namespace regmod::testing {

/// A complete automaton with uniformly random targets.
template <typename Rng>
TreeAutomaton random_automaton(const SignaturePtr& sig, const std::vector<std::size_t>& counts, Rng& rng) {
  TreeAutomaton a(sig, counts);
  for (const auto& [c, args] : slots(a)) {
    const std::size_t n = counts[sig->constructor(c).sort];
    a.set_target(c, args, static_cast<State>(1 + rng() % n));
  }
  return a;
}

}  // namespace regmod::testing
