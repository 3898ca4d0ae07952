#pragma once

#include <optional>
#include <string>
#include <vector>

#include "regmod/automaton.hpp"
#include "regmod/chc.hpp"

namespace regmod {

/// A clause compiled to state-variable form.  State variable i is printed
/// `Qi`.  Binder k of the source clause becomes state variable k; every
/// constructor occurrence gets a fresh variable numbered after the binders, in
/// head-then-body, left-to-right, innermost-first order.  Equalities are
/// applied by merging variables (the larger index represents the class), so
/// `equalities` only records which pairs were merged.
struct FlatClause {
  struct Transition {
    std::size_t ctor;
    std::vector<std::size_t> args;
    std::size_t result;
  };
  struct PredLiteral {
    std::size_t pred;
    std::vector<std::size_t> args;
  };

  ClauseKind kind = ClauseKind::Definite;
  std::size_t source = 0;  // index of the clause in the problem
  std::vector<std::size_t> var_sorts;
  /// Variables that survive merging and occur in the clause.
  std::vector<std::size_t> live_vars;
  std::vector<Transition> transitions;
  std::vector<PredLiteral> predicates;
  std::vector<std::pair<std::size_t, std::size_t>> equalities;
  std::vector<std::pair<std::size_t, std::size_t>> disequalities;
  std::optional<PredLiteral> head;
  /// Variables bound by nothing but their sort (head-only or
  /// disequality-only), each ranging over every state of its sort.
  std::vector<std::size_t> generators;
  /// Set when a disequality relates two merged variables: the body can never
  /// hold on terms, so the clause is dropped.
  bool trivially_false = false;

  std::string to_string(const Signature& sig) const;
};

FlatClause flatten(const Problem& problem, const Signature& sig, const Clause& clause, std::size_t source = 0);
FlatClause flatten(const Problem& problem, const Clause& clause);

/// Flattened clauses of a problem with precomputed evaluation orders.
class FlatProgram {
 public:
  struct Step {
    enum class Kind : std::uint8_t { Transition, Predicate, Generator, Disequality };
    Kind kind;
    std::size_t index;  // into transitions / predicates / disequalities, or the generated variable
  };
  struct Entry {
    FlatClause clause;
    std::vector<Step> plan;
  };

  FlatProgram(const Problem& problem, SignaturePtr sig);

  const Signature& signature() const { return *sig_; }
  const SignaturePtr& signature_ptr() const { return sig_; }
  const std::vector<Entry>& definite() const { return definite_; }
  const std::vector<Entry>& goals() const { return goals_; }

 private:
  SignaturePtr sig_;
  std::vector<Entry> definite_;
  std::vector<Entry> goals_;
};

/// Assignment of states to the flat variables (kNoState for unused ones).
using StateAssignment = std::vector<State>;

/// Enumerates the assignments satisfying a flat clause body over a (possibly
/// partial) automaton.  Stops when `visit` returns false.
template <typename Visit>
void for_each_body_match(const FlatProgram::Entry& entry, const TreeAutomaton& a, const PredicateTables& tables,
                         const Inhabitation& inh, Visit&& visit);

/// Least tables closed under the definite clauses.  Transitions that are not
/// assigned never fire, so on a partial automaton the result is contained in
/// the least tables of every completion.
PredicateTables least_tables(const TreeAutomaton& a, const FlatProgram& program);
PredicateTables least_tables(const TreeAutomaton& a, const Problem& problem);

struct Verdict {
  enum class Reason : std::uint8_t { ClosureViolation, GoalViolation };
  struct Witness {
    Reason reason;
    std::size_t clause;  // index in the problem
    StateAssignment assignment;
  };

  std::optional<Witness> witness;

  bool is_model() const { return !witness.has_value(); }
};

/// The first goal instance satisfied over (a, tables), if any.
std::optional<Verdict::Witness> find_goal_violation(const TreeAutomaton& a, const PredicateTables& tables,
                                                    const Inhabitation& inh, const FlatProgram& program);

Verdict check_model(const TreeAutomaton& a, const PredicateTables& tables, const FlatProgram& program);
Verdict check_model(const TreeAutomaton& a, const PredicateTables& tables, const Problem& problem);

/// Re-checks a NotModel witness against the flat clause it names.
bool witness_holds(const TreeAutomaton& a, const PredicateTables& tables, const FlatProgram& program,
                   const Verdict::Witness& witness);

bool interpret_atom(const TreeAutomaton& a, const PredicateTables& tables, const Atom& atom);

// ---------------------------------------------------------------------------

namespace detail {

template <typename Visit>
class BodyEnumerator {
 public:
  BodyEnumerator(const FlatProgram::Entry& entry, const TreeAutomaton& a, const PredicateTables& tables,
                 const Inhabitation& inh, Visit& visit)
      : entry_(entry), a_(a), tables_(tables), inh_(inh), visit_(visit),
        assign_(entry.clause.var_sorts.size(), kNoState) {}

  void run() { step(0); }

 private:
  // Returns false once the visitor asked to stop.
  bool step(std::size_t i) {
    if (i == entry_.plan.size()) return visit_(static_cast<const StateAssignment&>(assign_));
    const auto& st = entry_.plan[i];
    const FlatClause& fc = entry_.clause;
    switch (st.kind) {
      case FlatProgram::Step::Kind::Generator: {
        std::size_t v = st.index;
        const std::size_t n = a_.state_count(fc.var_sorts[v]);
        for (State q = 1; q <= n; ++q) {
          assign_[v] = q;
          if (!step(i + 1)) return false;
        }
        assign_[v] = kNoState;
        return true;
      }
      case FlatProgram::Step::Kind::Disequality: {
        const auto& [x, y] = fc.disequalities[st.index];
        if (!diff_approx(inh_, fc.var_sorts[x], assign_[x], assign_[y])) return true;
        return step(i + 1);
      }
      case FlatProgram::Step::Kind::Predicate:
        return predicate_step(i, fc.predicates[st.index]);
      case FlatProgram::Step::Kind::Transition:
        return transition_step(i, fc.transitions[st.index]);
    }
    return true;
  }

  bool predicate_step(std::size_t i, const FlatClause::PredLiteral& lit) {
    bool all_bound = true;
    for (auto v : lit.args) all_bound = all_bound && assign_[v] != kNoState;
    if (all_bound) {
      scratch_.clear();
      for (auto v : lit.args) scratch_.push_back(assign_[v]);
      if (!tables_.contains(lit.pred, scratch_)) return true;
      return step(i + 1);
    }
    const auto& tuples = tables_.tuples(lit.pred);
    const std::size_t n = tuples.size();
    std::vector<std::size_t> bound_here;
    for (std::size_t t = 0; t < n; ++t) {
      const auto& tup = tuples[t];
      bool ok = true;
      bound_here.clear();
      for (std::size_t k = 0; k < lit.args.size() && ok; ++k) {
        State& slot = assign_[lit.args[k]];
        if (slot == kNoState) {
          slot = tup[k];
          bound_here.push_back(lit.args[k]);
        } else {
          ok = slot == tup[k];
        }
      }
      bool cont = !ok || step(i + 1);
      for (auto v : bound_here) assign_[v] = kNoState;
      if (!cont) return false;
    }
    return true;
  }

  bool transition_step(std::size_t i, const FlatClause::Transition& tr) {
    const auto& ctor = a_.signature().constructor(tr.ctor);
    std::vector<std::size_t> free;
    for (std::size_t k = 0; k < tr.args.size(); ++k)
      if (assign_[tr.args[k]] == kNoState &&
          std::find(free.begin(), free.end(), tr.args[k]) == free.end())
        free.push_back(tr.args[k]);
    std::vector<State> args(tr.args.size());
    // Enumerate the unbound argument variables over their sorts.
    std::vector<std::size_t> radix;
    for (auto v : free) {
      radix.push_back(a_.state_count(fc_sort(v)));
      if (radix.back() == 0) return true;
    }
    std::vector<std::size_t> idx(free.size(), 0);
    while (true) {
      for (std::size_t f = 0; f < free.size(); ++f) assign_[free[f]] = static_cast<State>(idx[f] + 1);
      for (std::size_t k = 0; k < tr.args.size(); ++k) args[k] = assign_[tr.args[k]];
      State q = a_.target(tr.ctor, args);
      bool cont = true;
      if (q != kNoState && q <= a_.state_count(ctor.sort)) {
        State& res = assign_[tr.result];
        if (res == kNoState) {
          res = q;
          cont = step(i + 1);
          res = kNoState;
        } else if (res == q) {
          cont = step(i + 1);
        }
      }
      if (!cont) {
        for (auto v : free) assign_[v] = kNoState;
        return false;
      }
      std::size_t k = idx.size();
      bool more = false;
      while (k > 0) {
        --k;
        if (++idx[k] < radix[k]) {
          more = true;
          break;
        }
        idx[k] = 0;
      }
      if (!more) break;
    }
    for (auto v : free) assign_[v] = kNoState;
    return true;
  }

  std::size_t fc_sort(std::size_t v) const { return entry_.clause.var_sorts[v]; }

  const FlatProgram::Entry& entry_;
  const TreeAutomaton& a_;
  const PredicateTables& tables_;
  const Inhabitation& inh_;
  Visit& visit_;
  StateAssignment assign_;
  std::vector<State> scratch_;
};

}  // namespace detail

template <typename Visit>
void for_each_body_match(const FlatProgram::Entry& entry, const TreeAutomaton& a, const PredicateTables& tables,
                         const Inhabitation& inh, Visit&& visit) {
  if (entry.clause.trivially_false) return;
  detail::BodyEnumerator<std::remove_reference_t<Visit>> e(entry, a, tables, inh, visit);
  e.run();
}

}  // namespace regmod
