#include "regmod/automaton.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>

#include "odometer.hpp"

namespace regmod {

Signature::Signature(const Problem& problem) {
  for (const auto& s : problem.sorts) sorts_.push_back(s.name);
  for (std::size_t si = 0; si < problem.sorts.size(); ++si) {
    for (const auto& c : problem.sorts[si].constructors) {
      Constructor ctor{c.name, si, {}};
      for (const auto& a : c.arg_sorts) {
        auto idx = sort_index(a);
        if (!idx) throw std::invalid_argument("constructor " + c.name + " uses undeclared sort " + a);
        ctor.args.push_back(*idx);
      }
      ctors_.push_back(std::move(ctor));
    }
  }
  for (const auto& p : problem.predicates) {
    Predicate pred{p.name, {}};
    for (const auto& a : p.arg_sorts) {
      auto idx = sort_index(a);
      if (!idx) throw std::invalid_argument("predicate " + p.name + " uses undeclared sort " + a);
      pred.args.push_back(*idx);
    }
    preds_.push_back(std::move(pred));
  }
}

std::optional<std::size_t> Signature::sort_index(const std::string& name) const {
  for (std::size_t i = 0; i < sorts_.size(); ++i)
    if (sorts_[i] == name) return i;
  return std::nullopt;
}

std::optional<std::size_t> Signature::constructor_index(const std::string& name) const {
  for (std::size_t i = 0; i < ctors_.size(); ++i)
    if (ctors_[i].name == name) return i;
  return std::nullopt;
}

std::optional<std::size_t> Signature::predicate_index(const std::string& name) const {
  for (std::size_t i = 0; i < preds_.size(); ++i)
    if (preds_[i].name == name) return i;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

TreeAutomaton::TreeAutomaton(SignaturePtr sig, std::vector<std::size_t> state_counts)
    : TreeAutomaton(sig, state_counts, state_counts) {}

TreeAutomaton::TreeAutomaton(SignaturePtr sig, std::vector<std::size_t> state_counts,
                             std::vector<std::size_t> capacity)
    : sig_(std::move(sig)), counts_(std::move(state_counts)), capacity_(std::move(capacity)) {
  if (counts_.size() != sig_->sort_count() || capacity_.size() != counts_.size())
    throw std::invalid_argument("state counts do not match the number of sorts");
  for (std::size_t s = 0; s < counts_.size(); ++s)
    if (counts_[s] > capacity_[s]) throw std::invalid_argument("state count exceeds capacity");
  for (const auto& c : sig_->constructors()) {
    std::size_t slots = 1;
    for (auto a : c.args) slots *= capacity_[a];
    delta_.emplace_back(slots, kNoState);
  }
}

void TreeAutomaton::set_state_count(std::size_t sort, std::size_t n) {
  if (n > capacity_[sort]) throw std::invalid_argument("state count exceeds capacity");
  counts_[sort] = n;
}

std::size_t TreeAutomaton::total_states() const {
  std::size_t n = 0;
  for (auto c : counts_) n += c;
  return n;
}

std::size_t TreeAutomaton::slot_index(std::size_t ctor, std::span<const State> args) const {
  const auto& c = sig_->constructor(ctor);
  if (args.size() != c.args.size()) throw std::invalid_argument("wrong number of argument states");
  std::size_t idx = 0;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] < 1 || args[k] > capacity_[c.args[k]])
      throw std::out_of_range("argument state out of range");
    idx = idx * capacity_[c.args[k]] + (args[k] - 1);
  }
  return idx;
}

State TreeAutomaton::target(std::size_t ctor, std::span<const State> args) const {
  return delta_[ctor][slot_index(ctor, args)];
}

void TreeAutomaton::set_target(std::size_t ctor, std::span<const State> args, State q) {
  delta_[ctor][slot_index(ctor, args)] = q;
}

bool TreeAutomaton::complete() const {
  for (std::size_t c = 0; c < delta_.size(); ++c) {
    bool ok = true;
    for_each_slot(c, [&](std::span<const State> args) {
      if (target(c, args) == kNoState) ok = false;
    });
    if (!ok) return false;
  }
  return true;
}

bool operator==(const TreeAutomaton& a, const TreeAutomaton& b) {
  if (a.counts_ != b.counts_ || a.sig_->constructors().size() != b.sig_->constructors().size()) return false;
  for (std::size_t c = 0; c < a.delta_.size(); ++c) {
    bool same = true;
    a.for_each_slot(c, [&](std::span<const State> args) {
      if (a.target(c, args) != b.target(c, args)) same = false;
    });
    if (!same) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

PredicateTables::PredicateTables(SignaturePtr sig, std::vector<std::size_t> state_counts)
    : sig_(std::move(sig)), counts_(std::move(state_counts)) {
  for (const auto& p : sig_->predicates()) {
    std::size_t n = 1;
    for (auto a : p.args) n *= counts_[a];
    bits_.emplace_back(n, 0);
    lists_.emplace_back();
  }
}

bool PredicateTables::in_range(std::size_t pred, std::span<const State> tuple) const {
  const auto& p = sig_->predicate(pred);
  if (tuple.size() != p.args.size()) return false;
  for (std::size_t k = 0; k < tuple.size(); ++k)
    if (tuple[k] < 1 || tuple[k] > counts_[p.args[k]]) return false;
  return true;
}

std::size_t PredicateTables::index(std::size_t pred, std::span<const State> tuple) const {
  const auto& p = sig_->predicate(pred);
  std::size_t idx = 0;
  for (std::size_t k = 0; k < tuple.size(); ++k) idx = idx * counts_[p.args[k]] + (tuple[k] - 1);
  return idx;
}

bool PredicateTables::contains(std::size_t pred, std::span<const State> tuple) const {
  return in_range(pred, tuple) && bits_[pred][index(pred, tuple)] != 0;
}

bool PredicateTables::insert(std::size_t pred, std::span<const State> tuple) {
  if (!in_range(pred, tuple)) throw std::out_of_range("tuple outside the state ranges of " + sig_->predicate(pred).name);
  auto& bit = bits_[pred][index(pred, tuple)];
  if (bit) return false;
  bit = 1;
  lists_[pred].emplace_back(tuple.begin(), tuple.end());
  return true;
}

bool PredicateTables::erase(std::size_t pred, std::span<const State> tuple) {
  if (!contains(pred, tuple)) return false;
  bits_[pred][index(pred, tuple)] = 0;
  auto& list = lists_[pred];
  list.erase(std::find_if(list.begin(), list.end(),
                          [&](const auto& t) { return std::equal(t.begin(), t.end(), tuple.begin(), tuple.end()); }));
  return true;
}

std::vector<std::vector<State>> PredicateTables::sorted_tuples(std::size_t pred) const {
  auto out = lists_[pred];
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t PredicateTables::size() const {
  std::size_t n = 0;
  for (const auto& l : lists_) n += l.size();
  return n;
}

bool PredicateTables::subset_of(const PredicateTables& other) const {
  for (std::size_t p = 0; p < lists_.size(); ++p)
    for (const auto& t : lists_[p])
      if (!other.contains(p, t)) return false;
  return true;
}

bool PredicateTables::well_ranged() const {
  for (std::size_t p = 0; p < lists_.size(); ++p)
    for (const auto& t : lists_[p])
      if (!in_range(p, t)) return false;
  return true;
}

bool operator==(const PredicateTables& a, const PredicateTables& b) {
  return a.size() == b.size() && a.subset_of(b);
}

// ---------------------------------------------------------------------------

std::vector<AutomatonIssue> check_automaton(const TreeAutomaton& a) {
  std::vector<AutomatonIssue> issues;
  const auto& sig = a.signature();
  for (std::size_t s = 0; s < sig.sort_count(); ++s)
    if (a.state_count(s) == 0)
      issues.push_back({AutomatonIssue::Kind::EmptySort, "sort " + sig.sort_name(s) + " has no states"});
  for (std::size_t c = 0; c < sig.constructors().size(); ++c) {
    const auto& ctor = sig.constructor(c);
    a.for_each_slot(c, [&](std::span<const State> args) {
      std::string slot = ctor.name;
      if (!args.empty()) {
        slot += "(";
        for (std::size_t k = 0; k < args.size(); ++k) slot += (k ? "," : "") + std::to_string(args[k]);
        slot += ")";
      }
      State q = a.target(c, args);
      if (q == kNoState)
        issues.push_back({AutomatonIssue::Kind::Incomplete, "no transition for " + slot});
      else if (q > a.state_count(ctor.sort))
        issues.push_back({AutomatonIssue::Kind::OutOfRange,
                          "transition " + slot + " -> " + std::to_string(q) + " leaves the " +
                              std::to_string(a.state_count(ctor.sort)) + " states of sort " +
                              sig.sort_name(ctor.sort)});
    });
  }
  return issues;
}

Inhabitation inhabitation(const TreeAutomaton& a) {
  const auto& sig = a.signature();
  std::vector<std::vector<int>> count(sig.sort_count());
  for (std::size_t s = 0; s < sig.sort_count(); ++s) count[s].assign(a.state_count(s), 0);

  for (bool changed = true; changed;) {
    changed = false;
    std::vector<std::vector<int>> next(sig.sort_count());
    for (std::size_t s = 0; s < sig.sort_count(); ++s) next[s].assign(a.state_count(s), 0);
    for (std::size_t c = 0; c < sig.constructors().size(); ++c) {
      const auto& ctor = sig.constructor(c);
      a.for_each_slot(c, [&](std::span<const State> args) {
        State q = a.target(c, args);
        if (q == kNoState || q > a.state_count(ctor.sort)) return;
        int prod = 1;
        for (std::size_t k = 0; k < args.size(); ++k) prod = std::min(2, prod * count[ctor.args[k]][args[k] - 1]);
        int& slot = next[ctor.sort][q - 1];
        slot = std::min(2, slot + prod);
      });
    }
    if (next != count) {
      count = std::move(next);
      changed = true;
    }
  }

  std::vector<std::vector<Cardinality>> classes(sig.sort_count());
  for (std::size_t s = 0; s < sig.sort_count(); ++s)
    for (int n : count[s]) classes[s].push_back(static_cast<Cardinality>(n));
  return Inhabitation(std::move(classes));
}

bool diff_approx(const Inhabitation& inh, std::size_t sort, State q1, State q2) {
  if (q1 != q2) return inh.inhabited(sort, q1) && inh.inhabited(sort, q2);
  return inh.of(sort, q1) == Cardinality::Many;
}

bool diff_approx(const TreeAutomaton& a, std::size_t sort, State q1, State q2) {
  return diff_approx(inhabitation(a), sort, q1, q2);
}

State run_term(const TreeAutomaton& a, const Term& t) {
  if (t.is_var()) throw std::invalid_argument("run_term on variable " + t.name);
  auto c = a.signature().constructor_index(t.name);
  if (!c) throw std::invalid_argument("unknown constructor " + t.name);
  std::vector<State> args;
  args.reserve(t.args.size());
  for (const auto& sub : t.args) args.push_back(run_term(a, sub));
  State q = a.target(*c, args);
  if (q == kNoState) throw std::logic_error("no transition for " + t.to_string());
  return q;
}

std::vector<Term> sample_language(const TreeAutomaton& a, std::size_t sort, State q, std::size_t limit) {
  std::vector<Term> out;
  if (limit == 0) return out;
  auto inh = inhabitation(a);
  if (!inh.inhabited(sort, q)) return out;

  const auto& sig = a.signature();
  // by_state[s][q-1] holds a bounded sample of recognized terms grouped by
  // depth; keeping at least one term per (state, depth) is enough to build a
  // term at every depth where the full language has one.
  const std::size_t keep = std::max<std::size_t>(limit, 1);
  std::vector<std::vector<std::vector<Term>>> pool(sig.sort_count());
  for (std::size_t s = 0; s < sig.sort_count(); ++s) pool[s].resize(a.state_count(s));

  // A finite language has no term deeper than the state count; an infinite
  // one has a term in every window of that many consecutive depths.
  const std::size_t window = a.total_states() + 1;
  std::size_t last_hit = 0;
  for (std::size_t depth = 0;; ++depth) {
    std::vector<std::vector<std::vector<Term>>> layer(sig.sort_count());
    for (std::size_t s = 0; s < sig.sort_count(); ++s) layer[s].resize(a.state_count(s));
    bool any = false;
    for (std::size_t c = 0; c < sig.constructors().size(); ++c) {
      const auto& ctor = sig.constructor(c);
      a.for_each_slot(c, [&](std::span<const State> args) {
        State target = a.target(c, args);
        if (target == kNoState) return;
        auto& bucket = layer[ctor.sort][target - 1];
        if (args.empty()) {
          if (depth == 0 && bucket.size() < keep) bucket.push_back(Term::app(ctor.name));
          return;
        }
        if (depth == 0) return;
        std::vector<const std::vector<Term>*> choices;
        std::vector<std::size_t> radix;
        for (std::size_t k = 0; k < args.size(); ++k) {
          choices.push_back(&pool[ctor.args[k]][args[k] - 1]);
          radix.push_back(choices.back()->size());
        }
        if (std::find(radix.begin(), radix.end(), 0) != radix.end()) return;
        std::vector<std::size_t> idx(args.size(), 0);
        do {
          std::size_t deepest = 0;
          std::vector<Term> sub;
          for (std::size_t k = 0; k < args.size(); ++k) {
            sub.push_back((*choices[k])[idx[k]]);
            deepest = std::max(deepest, sub.back().depth());
          }
          if (deepest + 1 != depth) continue;
          if (bucket.size() >= keep) return;
          bucket.push_back(Term::app(ctor.name, std::move(sub)));
        } while (detail::advance(idx, radix));
      });
    }
    for (std::size_t s = 0; s < sig.sort_count(); ++s) {
      for (std::size_t i = 0; i < layer[s].size(); ++i) {
        if (layer[s][i].empty()) continue;
        any = true;
        for (auto& t : layer[s][i]) pool[s][i].push_back(std::move(t));
      }
    }
    for (const auto& t : pool[sort][q - 1]) {
      if (t.depth() != depth) continue;
      out.push_back(t);
      last_hit = depth;
      if (out.size() == limit) return out;
    }
    if (!any || depth > last_hit + window) return out;
  }
}

std::pair<TreeAutomaton, PredicateTables> trim(const TreeAutomaton& a, const PredicateTables& tables) {
  const auto& sig = a.signature();
  auto inh = inhabitation(a);
  std::vector<std::vector<State>> rename(sig.sort_count());
  std::vector<std::size_t> counts(sig.sort_count(), 0);
  for (std::size_t s = 0; s < sig.sort_count(); ++s) {
    rename[s].assign(a.state_count(s) + 1, kNoState);
    for (State q = 1; q <= a.state_count(s); ++q)
      if (inh.inhabited(s, q)) rename[s][q] = static_cast<State>(++counts[s]);
  }

  TreeAutomaton out(a.signature_ptr(), counts);
  for (std::size_t c = 0; c < sig.constructors().size(); ++c) {
    const auto& ctor = sig.constructor(c);
    a.for_each_slot(c, [&](std::span<const State> args) {
      std::vector<State> mapped;
      for (std::size_t k = 0; k < args.size(); ++k) {
        State m = rename[ctor.args[k]][args[k]];
        if (m == kNoState) return;
        mapped.push_back(m);
      }
      State q = a.target(c, args);
      if (q == kNoState) return;
      out.set_target(c, mapped, rename[ctor.sort][q]);
    });
  }

  PredicateTables restricted(a.signature_ptr(), counts);
  for (std::size_t p = 0; p < sig.predicates().size(); ++p) {
    const auto& pred = sig.predicate(p);
    for (const auto& t : tables.tuples(p)) {
      std::vector<State> mapped;
      bool keep = true;
      for (std::size_t k = 0; k < t.size() && keep; ++k) {
        State m = rename[pred.args[k]][t[k]];
        keep = m != kNoState;
        mapped.push_back(m);
      }
      if (keep) restricted.insert(p, mapped);
    }
  }
  return {std::move(out), std::move(restricted)};
}

namespace {

std::string tuple_string(std::span<const State> args) {
  std::string out = "(";
  for (std::size_t k = 0; k < args.size(); ++k) out += (k ? "," : "") + std::to_string(args[k]);
  return out + ")";
}

std::string capitalized(std::string name) {
  if (!name.empty()) name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
  return name;
}

std::string padded(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

std::vector<std::string> transition_lines(const TreeAutomaton& a) {
  std::vector<std::string> lines;
  const auto& sig = a.signature();
  for (std::size_t c = 0; c < sig.constructors().size(); ++c) {
    a.for_each_slot(c, [&](std::span<const State> args) {
      State q = a.target(c, args);
      std::string lhs = capitalized(sig.constructor(c).name) + (args.empty() ? "" : tuple_string(args));
      lines.push_back(lhs + " -> " + (q == kNoState ? std::string("?") : std::to_string(q)));
    });
  }
  return lines;
}

std::vector<std::string> predicate_lines(const PredicateTables& tables, const Signature& sig) {
  std::vector<std::string> lines;
  for (std::size_t p = 0; p < sig.predicates().size(); ++p)
    for (const auto& t : tables.sorted_tuples(p)) lines.push_back(sig.predicate(p).name + tuple_string(t));
  return lines;
}

std::string render_model(const TreeAutomaton& a, const PredicateTables& tables) {
  auto trans = transition_lines(a);
  auto preds = predicate_lines(tables, a.signature());
  const std::string trans_header = "ADT Transitions:";
  std::size_t tw = std::max<std::size_t>(24, trans_header.size() + 2);
  for (const auto& t : trans) tw = std::max(tw, t.size() + 2);
  std::size_t pw = 19;
  for (const auto& p : preds) pw = std::max(pw, p.size() + 2);

  const std::size_t rows = std::max<std::size_t>(1, trans.size());
  const std::size_t cols = preds.empty() ? 1 : (preds.size() + rows - 1) / rows;
  auto rstrip = [](std::string s) {
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s;
  };

  std::string out = rstrip(padded(trans_header, tw) + "Predicates:") + "\n";
  for (std::size_t r = 0; r < rows; ++r) {
    std::string line = padded(r < trans.size() ? trans[r] : std::string(), tw);
    for (std::size_t c = 0; c < cols; ++c) {
      std::size_t i = c * rows + r;
      if (i < preds.size()) line += padded(preds[i], pw);
    }
    out += rstrip(line) + "\n";
  }
  return out;
}

}  // namespace regmod
