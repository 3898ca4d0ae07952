#include "regmod/native.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

#include "odometer.hpp"

namespace regmod {

SearchConfig SearchConfig::uniform(const Signature& sig, std::size_t n, bool symmetry_breaking) {
  SearchConfig c;
  c.max_states.assign(sig.sort_count(), n);
  c.symmetry_breaking = symmetry_breaking;
  return c;
}

TreeAutomaton compact(const TreeAutomaton& a) {
  TreeAutomaton out(a.signature_ptr(), a.state_counts());
  for (std::size_t c = 0; c < a.signature().constructors().size(); ++c)
    a.for_each_slot(c, [&](std::span<const State> args) { out.set_target(c, args, a.target(c, args)); });
  return out;
}

namespace {

class Budget {
 public:
  Budget(const SearchConfig& config, SearchStats* stats) : config_(config), stats_(stats ? stats : &local_) {}

  SearchStats& stats() { return *stats_; }

  void tick() {
    ++stats_->nodes;
    if (config_.node_budget && stats_->nodes > config_.node_budget)
      throw BudgetExceeded(BudgetExceeded::Reason::Nodes,
                           "node budget of " + std::to_string(config_.node_budget) + " exhausted");
    if (config_.deadline && (stats_->nodes & 63) == 0 && Clock::now() > *config_.deadline)
      throw BudgetExceeded(BudgetExceeded::Reason::Time, "time limit reached");
  }

 private:
  const SearchConfig& config_;
  SearchStats local_;
  SearchStats* stats_;
};

void check_config(const Signature& sig, const SearchConfig& config) {
  if (config.max_states.size() != sig.sort_count())
    throw std::invalid_argument("max_states needs one entry per sort");
  for (auto n : config.max_states)
    if (n == 0) throw std::invalid_argument("max_states must be positive");
}

// Depth-first construction of canonically labelled trim automata.  `prune`
// sees every partial automaton (unassigned slots hold kNoState) and may cut
// the subtree; `leaf` sees every complete one and returns false to stop.
class CanonicalSearch {
 public:
  using Prune = std::function<bool(const TreeAutomaton&)>;
  using Leaf = std::function<bool(const TreeAutomaton&)>;

  CanonicalSearch(const SignaturePtr& sig, const SearchConfig& config, Budget& budget, Prune prune, Leaf leaf)
      : sig_(*sig),
        budget_(budget),
        prune_(std::move(prune)),
        leaf_(std::move(leaf)),
        a_(sig, std::vector<std::size_t>(sig->sort_count(), 0), config.max_states),
        intro_(sig->sort_count()) {}

  void run() { dfs(); }

 private:
  struct Slot {
    std::size_t avail = 0;
    std::size_t ctor = 0;
    std::vector<State> args;
  };

  // Minimum unassigned slot over the introduced states, if any.
  std::optional<Slot> next_slot() const {
    std::optional<Slot> best;
    for (std::size_t c = 0; c < sig_.constructors().size(); ++c) {
      a_.for_each_slot(c, [&](std::span<const State> args) {
        if (a_.target(c, args) != kNoState) return;
        const auto& ctor = sig_.constructor(c);
        std::size_t avail = 0;
        for (std::size_t k = 0; k < args.size(); ++k) avail = std::max(avail, intro_[ctor.args[k]][args[k] - 1]);
        if (!best || std::tie(avail, c) < std::tie(best->avail, best->ctor) ||
            (avail == best->avail && c == best->ctor &&
             std::lexicographical_compare(args.begin(), args.end(), best->args.begin(), best->args.end()))) {
          best = Slot{avail, c, std::vector<State>(args.begin(), args.end())};
        }
      });
    }
    return best;
  }

  // Returns false once the leaf callback asked to stop.
  bool dfs() {
    budget_.tick();
    if (prune_ && prune_(a_)) {
      ++budget_.stats().pruned;
      return true;
    }
    auto slot = next_slot();
    if (!slot) {
      ++budget_.stats().leaves;
      return leaf_(a_);
    }
    const std::size_t sort = sig_.constructor(slot->ctor).sort;
    const std::size_t n = a_.state_count(sort);
    for (State q = 1; q <= n; ++q) {
      a_.set_target(slot->ctor, slot->args, q);
      if (!dfs()) return false;
    }
    if (n < a_.capacity(sort)) {
      a_.set_state_count(sort, n + 1);
      intro_[sort].push_back(++clock_);
      a_.set_target(slot->ctor, slot->args, static_cast<State>(n + 1));
      bool cont = dfs();
      intro_[sort].pop_back();
      --clock_;
      a_.set_state_count(sort, n);
      if (!cont) {
        a_.clear_target(slot->ctor, slot->args);
        return false;
      }
    }
    a_.clear_target(slot->ctor, slot->args);
    return true;
  }

  const Signature& sig_;
  Budget& budget_;
  Prune prune_;
  Leaf leaf_;
  TreeAutomaton a_;
  std::vector<std::vector<std::size_t>> intro_;  // per sort, per label: introduction time
  std::size_t clock_ = 0;
};

// Every total transition map with the given state counts, in odometer order
// over (constructor, argument tuple) slots.
void enumerate_raw(const SignaturePtr& sig, const std::vector<std::size_t>& counts, Budget& budget,
                   const std::function<bool(const TreeAutomaton&)>& leaf) {
  TreeAutomaton a(sig, counts);
  struct Slot {
    std::size_t ctor;
    std::vector<State> args;
  };
  std::vector<Slot> slots;
  std::vector<std::size_t> radix;
  for (std::size_t c = 0; c < sig->constructors().size(); ++c) {
    a.for_each_slot(c, [&](std::span<const State> args) {
      slots.push_back({c, std::vector<State>(args.begin(), args.end())});
      radix.push_back(counts[sig->constructor(c).sort]);
    });
  }
  std::vector<std::size_t> idx(slots.size(), 0);
  do {
    budget.tick();
    for (std::size_t i = 0; i < slots.size(); ++i)
      a.set_target(slots[i].ctor, slots[i].args, static_cast<State>(idx[i] + 1));
    ++budget.stats().leaves;
    if (!leaf(a)) return;
  } while (detail::advance(idx, radix));
}

bool is_trim(const TreeAutomaton& a) {
  const Inhabitation inh = inhabitation(a);
  for (std::size_t s = 0; s < a.signature().sort_count(); ++s)
    for (State q = 1; q <= a.state_count(s); ++q)
      if (!inh.inhabited(s, q)) return false;
  return true;
}

// Goal violation of the least tables of a (possibly partial) automaton.
bool violates_goal(const TreeAutomaton& a, const FlatProgram& program) {
  const PredicateTables tables = least_tables(a, program);
  return find_goal_violation(a, tables, inhabitation(a), program).has_value();
}

}  // namespace

std::size_t enumerate_canonical(const SignaturePtr& sig, const SearchConfig& config,
                                const std::function<bool(const TreeAutomaton&)>& visit, SearchStats* stats) {
  check_config(*sig, config);
  Budget budget(config, stats);
  std::size_t emitted = 0;
  auto leaf = [&](const TreeAutomaton& a) {
    ++emitted;
    return visit(a);
  };
  if (config.symmetry_breaking) {
    CanonicalSearch search(sig, config, budget, nullptr, [&](const TreeAutomaton& a) { return leaf(compact(a)); });
    search.run();
  } else {
    enumerate_raw(sig, config.max_states, budget, leaf);
  }
  return emitted;
}

std::optional<NativeModel> search_model(const FlatProgram& program, const SearchConfig& config, SearchStats* stats) {
  const SignaturePtr& sig = program.signature_ptr();
  check_config(*sig, config);
  Budget budget(config, stats);
  std::optional<NativeModel> found;

  auto accept = [&](const TreeAutomaton& partial) {
    TreeAutomaton a = compact(partial);
    PredicateTables tables = least_tables(a, program);
    if (find_goal_violation(a, tables, inhabitation(a), program)) return true;
    if (!check_model(a, tables, program).is_model())
      throw std::logic_error("least tables failed re-verification");
    found = NativeModel{std::move(a), std::move(tables)};
    return false;
  };

  if (config.symmetry_breaking) {
    // Unassigned transitions never fire and unseen states never occur, so a
    // violation on a partial automaton persists in every completion.
    CanonicalSearch search(
        sig, config, budget, [&](const TreeAutomaton& a) { return violates_goal(a, program); }, accept);
    search.run();
    return found;
  }

  // Exact state counts for every vector below the bound; non-trim automata
  // are skipped so that the verdicts agree with the canonical search.
  std::vector<std::size_t> counts(sig->sort_count(), 0);
  std::vector<std::size_t> radix(config.max_states);
  do {
    std::vector<std::size_t> exact(counts.size());
    for (std::size_t s = 0; s < counts.size(); ++s) exact[s] = counts[s] + 1;
    enumerate_raw(sig, exact, budget, [&](const TreeAutomaton& a) {
      if (!is_trim(a)) return true;
      return accept(a);
    });
    if (found) return found;
  } while (detail::advance(counts, radix));
  return std::nullopt;
}

std::optional<NativeModel> search_model(const Problem& problem, const SearchConfig& config, SearchStats* stats) {
  FlatProgram program(problem, std::make_shared<const Signature>(problem));
  return search_model(program, config, stats);
}

std::optional<Derivation> find_counterexample(const Problem& problem, std::size_t depth_bound, std::size_t atom_cap) {
  GroundModel model = derive_ground_model(problem, depth_bound, atom_cap);
  auto d = goal_violated(problem, model);
  if (d && !replay_derivation(problem, *d)) throw std::logic_error("counterexample failed replay");
  return d;
}

}  // namespace regmod
