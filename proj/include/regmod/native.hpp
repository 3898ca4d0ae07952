#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "regmod/automaton.hpp"
#include "regmod/chc.hpp"
#include "regmod/interpretation.hpp"

namespace regmod {

using Clock = std::chrono::steady_clock;

struct SearchConfig {
  /// Upper bound on the number of states, one entry per sort.
  std::vector<std::size_t> max_states;
  bool symmetry_breaking = true;
  /// Search nodes allowed before BudgetExceeded(Nodes); 0 means unlimited.
  std::size_t node_budget = 0;
  std::optional<Clock::time_point> deadline;

  static SearchConfig uniform(const Signature& sig, std::size_t n, bool symmetry_breaking = true);
};

struct SearchStats {
  std::size_t nodes = 0;
  std::size_t leaves = 0;
  std::size_t pruned = 0;
};

/// Streams complete deterministic automata over `sig` until `visit` returns
/// false; returns the number visited.
///
/// With symmetry breaking, the stream holds one automaton per isomorphism
/// class of trim automata (every state inhabited) with at most max_states
/// states per sort.  States are labelled in order of first appearance:
/// transition slots are filled in the order (time their argument states were
/// introduced, constructor index, argument tuple), and each slot targets an
/// existing state or the next unused label of its sort.
///
/// Without symmetry breaking, every total transition map with exactly
/// max_states states per sort is streamed.
std::size_t enumerate_canonical(const SignaturePtr& sig, const SearchConfig& config,
                                const std::function<bool(const TreeAutomaton&)>& visit,
                                SearchStats* stats = nullptr);

struct NativeModel {
  TreeAutomaton automaton;
  PredicateTables tables;
};

/// First trim automaton with at most max_states states per sort whose least
/// tables satisfy every goal.  The returned pair always passes check_model.
/// Throws BudgetExceeded when the node budget or deadline runs out.
std::optional<NativeModel> search_model(const Problem& problem, const SearchConfig& config,
                                        SearchStats* stats = nullptr);
std::optional<NativeModel> search_model(const FlatProgram& program, const SearchConfig& config,
                                        SearchStats* stats = nullptr);

/// A goal instance over terms of depth <= depth_bound whose body atoms are in
/// the bounded least Herbrand model, with proofs.
std::optional<Derivation> find_counterexample(const Problem& problem, std::size_t depth_bound,
                                              std::size_t atom_cap = kDefaultAtomCap);

/// Copy of `a` whose transition table is sized to its live state counts.
TreeAutomaton compact(const TreeAutomaton& a);

}  // namespace regmod
