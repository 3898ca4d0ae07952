#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regmod/chc.hpp"

namespace regmod {

/// States are numbered 1..n within each sort; 0 marks an unassigned
/// transition target.
using State = std::uint32_t;
inline constexpr State kNoState = 0;

/// Index-based view of a problem's sorts, constructors and predicates.
class Signature {
 public:
  struct Constructor {
    std::string name;
    std::size_t sort;
    std::vector<std::size_t> args;
  };
  struct Predicate {
    std::string name;
    std::vector<std::size_t> args;
  };

  explicit Signature(const Problem& problem);

  std::size_t sort_count() const { return sorts_.size(); }
  const std::string& sort_name(std::size_t s) const { return sorts_[s]; }
  std::optional<std::size_t> sort_index(const std::string& name) const;

  const std::vector<Constructor>& constructors() const { return ctors_; }
  const Constructor& constructor(std::size_t c) const { return ctors_[c]; }
  std::optional<std::size_t> constructor_index(const std::string& name) const;

  const std::vector<Predicate>& predicates() const { return preds_; }
  const Predicate& predicate(std::size_t p) const { return preds_[p]; }
  std::optional<std::size_t> predicate_index(const std::string& name) const;

 private:
  std::vector<std::string> sorts_;
  std::vector<Constructor> ctors_;
  std::vector<Predicate> preds_;
};

using SignaturePtr = std::shared_ptr<const Signature>;

/// Complete deterministic bottom-up tree automaton, states partitioned by
/// sort.  Transitions are stored per constructor in a dense table indexed by
/// the argument tuple; the table radix is the per-sort capacity so that the
/// live state count can grow without re-indexing.
class TreeAutomaton {
 public:
  TreeAutomaton(SignaturePtr sig, std::vector<std::size_t> state_counts);
  TreeAutomaton(SignaturePtr sig, std::vector<std::size_t> state_counts, std::vector<std::size_t> capacity);

  const Signature& signature() const { return *sig_; }
  const SignaturePtr& signature_ptr() const { return sig_; }

  std::size_t state_count(std::size_t sort) const { return counts_[sort]; }
  const std::vector<std::size_t>& state_counts() const { return counts_; }
  std::size_t capacity(std::size_t sort) const { return capacity_[sort]; }
  void set_state_count(std::size_t sort, std::size_t n);
  std::size_t total_states() const;

  State target(std::size_t ctor, std::span<const State> args) const;
  void set_target(std::size_t ctor, std::span<const State> args, State q);
  void clear_target(std::size_t ctor, std::span<const State> args) { set_target(ctor, args, kNoState); }

  /// Visits every argument tuple of `ctor` over the live states, in
  /// lexicographic order.
  template <typename F>
  void for_each_slot(std::size_t ctor, F&& f) const;

  /// True iff every live slot has a target (range is not checked).
  bool complete() const;

  friend bool operator==(const TreeAutomaton& a, const TreeAutomaton& b);

 private:
  std::size_t slot_index(std::size_t ctor, std::span<const State> args) const;

  SignaturePtr sig_;
  std::vector<std::size_t> counts_;
  std::vector<std::size_t> capacity_;
  std::vector<std::vector<State>> delta_;
};

/// For each predicate, the set of state tuples on which it holds.
class PredicateTables {
 public:
  PredicateTables(SignaturePtr sig, std::vector<std::size_t> state_counts);

  const std::vector<std::size_t>& state_counts() const { return counts_; }
  bool contains(std::size_t pred, std::span<const State> tuple) const;
  /// Returns true if the tuple was not present.
  bool insert(std::size_t pred, std::span<const State> tuple);
  bool erase(std::size_t pred, std::span<const State> tuple);

  /// Tuples in insertion order.
  const std::vector<std::vector<State>>& tuples(std::size_t pred) const { return lists_[pred]; }
  std::vector<std::vector<State>> sorted_tuples(std::size_t pred) const;
  std::size_t size() const;
  bool subset_of(const PredicateTables& other) const;
  /// Every tuple lies within the state ranges of its argument sorts.
  bool well_ranged() const;

  friend bool operator==(const PredicateTables& a, const PredicateTables& b);

 private:
  std::size_t index(std::size_t pred, std::span<const State> tuple) const;
  bool in_range(std::size_t pred, std::span<const State> tuple) const;

  SignaturePtr sig_;
  std::vector<std::size_t> counts_;
  std::vector<std::vector<std::uint8_t>> bits_;
  std::vector<std::vector<std::vector<State>>> lists_;
};

struct AutomatonIssue {
  enum class Kind : std::uint8_t { Incomplete, OutOfRange, EmptySort };
  Kind kind;
  std::string message;
};

std::vector<AutomatonIssue> check_automaton(const TreeAutomaton& a);

enum class Cardinality : std::uint8_t { Empty = 0, One = 1, Many = 2 };

/// Number of ground terms reaching each state, saturated at two.
class Inhabitation {
 public:
  Inhabitation() = default;
  explicit Inhabitation(std::vector<std::vector<Cardinality>> classes) : classes_(std::move(classes)) {}

  Cardinality of(std::size_t sort, State q) const { return classes_[sort][q - 1]; }
  bool inhabited(std::size_t sort, State q) const { return of(sort, q) != Cardinality::Empty; }

 private:
  std::vector<std::vector<Cardinality>> classes_;
};

/// Least fixpoint of the saturated counting equations; unassigned
/// transitions contribute nothing, so the result is a lower bound for any
/// completion of a partial automaton.
Inhabitation inhabitation(const TreeAutomaton& a);

/// Whether some two distinct ground terms reach q1 and q2 respectively.
bool diff_approx(const Inhabitation& inh, std::size_t sort, State q1, State q2);
bool diff_approx(const TreeAutomaton& a, std::size_t sort, State q1, State q2);

/// The state reached by a ground term.  Throws std::invalid_argument on
/// non-ground or unknown terms and std::logic_error on a missing transition.
State run_term(const TreeAutomaton& a, const Term& t);

/// Up to `limit` distinct terms recognized by q, in nondecreasing depth.
std::vector<Term> sample_language(const TreeAutomaton& a, std::size_t sort, State q, std::size_t limit);

/// Drops the uninhabited states (keeping the relative order of the others)
/// and restricts the tables accordingly.
std::pair<TreeAutomaton, PredicateTables> trim(const TreeAutomaton& a, const PredicateTables& tables);

/// One `C(q1,...,qn) -> q` line per transition, constructor names capitalized.
std::vector<std::string> transition_lines(const TreeAutomaton& a);
/// One `p(q1,...,qn)` entry per table tuple, predicates in declaration order.
std::vector<std::string> predicate_lines(const PredicateTables& tables, const Signature& sig);
/// The two-column "ADT Transitions: / Predicates:" block.
std::string render_model(const TreeAutomaton& a, const PredicateTables& tables);

// ---------------------------------------------------------------------------

template <typename F>
void TreeAutomaton::for_each_slot(std::size_t ctor, F&& f) const {
  const auto& c = sig_->constructor(ctor);
  std::vector<State> args(c.args.size(), 1);
  for (std::size_t k = 0; k < c.args.size(); ++k)
    if (counts_[c.args[k]] == 0) return;
  while (true) {
    f(std::span<const State>(args));
    std::size_t k = args.size();
    while (k > 0) {
      --k;
      if (args[k] < counts_[c.args[k]]) {
        ++args[k];
        break;
      }
      args[k] = 1;
      if (k == 0) return;
    }
    if (args.empty()) return;
  }
}

}  // namespace regmod
