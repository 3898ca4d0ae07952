#include "regmod/interpretation.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace regmod {

namespace {

class Flattener {
 public:
  Flattener(const Problem& problem, const Signature& sig, const Clause& clause, FlatClause& out)
      : problem_(problem), sig_(sig), out_(out) {
    for (std::size_t k = 0; k < clause.vars.size(); ++k) {
      binder_[clause.vars[k].name] = k;
      auto s = sig.sort_index(clause.vars[k].sort);
      if (!s) throw std::invalid_argument("undeclared sort " + clause.vars[k].sort);
      out_.var_sorts.push_back(*s);
    }
  }

  std::size_t term(const Term& t) {
    if (t.is_var()) {
      auto it = binder_.find(t.name);
      if (it == binder_.end()) throw std::invalid_argument("unbound variable " + t.name);
      return it->second;
    }
    auto c = sig_.constructor_index(t.name);
    if (!c) throw std::invalid_argument("undeclared constructor " + t.name);
    std::vector<std::size_t> args;
    for (const auto& a : t.args) args.push_back(term(a));
    std::size_t r = out_.var_sorts.size();
    out_.var_sorts.push_back(sig_.constructor(*c).sort);
    out_.transitions.push_back({*c, std::move(args), r});
    return r;
  }

  FlatClause::PredLiteral atom(const Atom& a) {
    auto p = sig_.predicate_index(a.predicate);
    if (!p) throw std::invalid_argument("undeclared predicate " + a.predicate);
    FlatClause::PredLiteral lit{*p, {}};
    for (const auto& t : a.args) lit.args.push_back(term(t));
    return lit;
  }

 private:
  const Problem& problem_;
  const Signature& sig_;
  FlatClause& out_;
  std::map<std::string, std::size_t> binder_;
};

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t v) {
  while (parent[v] != v) {
    parent[v] = parent[parent[v]];
    v = parent[v];
  }
  return v;
}

}  // namespace

FlatClause flatten(const Problem& problem, const Signature& sig, const Clause& clause, std::size_t source) {
  FlatClause fc;
  fc.kind = clause.kind;
  fc.source = source;
  Flattener f(problem, sig, clause, fc);

  if (clause.head) fc.head = f.atom(*clause.head);
  for (const auto& lit : clause.body) {
    switch (lit.kind) {
      case Literal::Kind::Atom:
        fc.predicates.push_back(f.atom(lit.as_atom()));
        break;
      case Literal::Kind::Eq: {
        std::size_t l = f.term(lit.args[0]);
        std::size_t r = f.term(lit.args[1]);
        fc.equalities.emplace_back(l, r);
        break;
      }
      case Literal::Kind::Diseq: {
        std::size_t l = f.term(lit.args[0]);
        std::size_t r = f.term(lit.args[1]);
        fc.disequalities.emplace_back(l, r);
        break;
      }
    }
  }

  // Term equality implies state equality under a deterministic automaton.
  std::vector<std::size_t> parent(fc.var_sorts.size());
  std::iota(parent.begin(), parent.end(), 0);
  for (const auto& [l, r] : fc.equalities) {
    std::size_t a = find_root(parent, l), b = find_root(parent, r);
    if (a == b) continue;
    if (a < b) std::swap(a, b);
    parent[b] = a;
  }
  auto rep = [&](std::size_t v) { return find_root(parent, v); };
  for (auto& t : fc.transitions) {
    for (auto& v : t.args) v = rep(v);
    t.result = rep(t.result);
  }
  for (auto& p : fc.predicates)
    for (auto& v : p.args) v = rep(v);
  if (fc.head)
    for (auto& v : fc.head->args) v = rep(v);
  for (auto& [l, r] : fc.disequalities) {
    l = rep(l);
    r = rep(r);
    if (l == r) fc.trivially_false = true;
  }

  // Merging can make transitions identical.
  std::vector<FlatClause::Transition> unique;
  for (auto& t : fc.transitions) {
    bool dup = std::any_of(unique.begin(), unique.end(), [&](const FlatClause::Transition& u) {
      return u.ctor == t.ctor && u.args == t.args && u.result == t.result;
    });
    if (!dup) unique.push_back(std::move(t));
  }
  fc.transitions = std::move(unique);

  std::set<std::size_t> live, body_bound;
  for (const auto& t : fc.transitions) {
    body_bound.insert(t.args.begin(), t.args.end());
    body_bound.insert(t.result);
  }
  for (const auto& p : fc.predicates) body_bound.insert(p.args.begin(), p.args.end());
  live = body_bound;
  if (fc.head) live.insert(fc.head->args.begin(), fc.head->args.end());
  for (const auto& [l, r] : fc.disequalities) {
    live.insert(l);
    live.insert(r);
  }
  fc.live_vars.assign(live.begin(), live.end());
  for (auto v : fc.live_vars)
    if (!body_bound.count(v)) fc.generators.push_back(v);
  return fc;
}

FlatClause flatten(const Problem& problem, const Clause& clause) {
  Signature sig(problem);
  return flatten(problem, sig, clause, 0);
}

std::string FlatClause::to_string(const Signature& sig) const {
  auto q = [](std::size_t v) { return "Q" + std::to_string(v); };
  auto list = [&](const std::vector<std::size_t>& vs) {
    std::string s;
    for (std::size_t i = 0; i < vs.size(); ++i) s += (i ? ", " : "") + q(vs[i]);
    return s;
  };
  std::vector<std::string> body;
  for (const auto& p : predicates) body.push_back(sig.predicate(p.pred).name + "(" + list(p.args) + ")");
  for (const auto& t : transitions) {
    std::string lhs = sig.constructor(t.ctor).name;
    if (!t.args.empty()) lhs += "(" + list(t.args) + ")";
    body.push_back("rule(" + lhs + ", " + q(t.result) + ")");
  }
  for (const auto& [l, r] : disequalities) body.push_back("diffApprox(" + q(l) + ", " + q(r) + ")");
  for (auto g : generators) body.push_back("stateType(" + q(g) + ", " + sig.sort_name(var_sorts[g]) + ")");

  std::string out;
  if (head) out = sig.predicate(head->pred).name + "(" + list(head->args) + ")";
  if (!body.empty()) {
    out += head ? " :- " : ":- ";
    for (std::size_t i = 0; i < body.size(); ++i) out += (i ? ", " : "") + body[i];
  }
  return out + ".";
}

// ---------------------------------------------------------------------------

namespace {

std::vector<FlatProgram::Step> plan_for(const FlatClause& fc) {
  using Step = FlatProgram::Step;
  std::vector<Step> plan;
  std::vector<bool> bound(fc.var_sorts.size(), false);
  std::vector<bool> used_pred(fc.predicates.size(), false), used_trans(fc.transitions.size(), false),
      used_diseq(fc.disequalities.size(), false);

  auto count_bound = [&](const std::vector<std::size_t>& vs) {
    std::size_t n = 0;
    for (auto v : vs) n += bound[v] ? 1 : 0;
    return n;
  };
  auto place_diseqs = [&] {
    for (std::size_t i = 0; i < fc.disequalities.size(); ++i) {
      const auto& [l, r] = fc.disequalities[i];
      if (!used_diseq[i] && bound[l] && bound[r]) {
        used_diseq[i] = true;
        plan.push_back({Step::Kind::Disequality, i});
      }
    }
  };

  const std::size_t total = fc.predicates.size() + fc.transitions.size();
  for (std::size_t placed = 0; placed < total; ++placed) {
    int best_score = -1;
    Step best{Step::Kind::Predicate, 0};
    for (std::size_t i = 0; i < fc.transitions.size(); ++i) {
      if (used_trans[i]) continue;
      const auto& t = fc.transitions[i];
      std::size_t b = count_bound(t.args);
      int score;
      if (b == t.args.size()) score = 1000;  // functional
      else if (bound[t.result]) score = 200 + static_cast<int>(b);
      else score = 10 + static_cast<int>(b);
      if (score > best_score) {
        best_score = score;
        best = {Step::Kind::Transition, i};
      }
    }
    for (std::size_t i = 0; i < fc.predicates.size(); ++i) {
      if (used_pred[i]) continue;
      const auto& p = fc.predicates[i];
      std::size_t b = count_bound(p.args);
      int score;
      if (b == p.args.size()) score = 900;
      else if (b > 0) score = 500 + static_cast<int>(b);
      else score = 300;
      if (score > best_score) {
        best_score = score;
        best = {Step::Kind::Predicate, i};
      }
    }
    plan.push_back(best);
    if (best.kind == Step::Kind::Transition) {
      used_trans[best.index] = true;
      for (auto v : fc.transitions[best.index].args) bound[v] = true;
      bound[fc.transitions[best.index].result] = true;
    } else {
      used_pred[best.index] = true;
      for (auto v : fc.predicates[best.index].args) bound[v] = true;
    }
    place_diseqs();
  }
  for (auto g : fc.generators) {
    plan.push_back({Step::Kind::Generator, g});
    bound[g] = true;
    place_diseqs();
  }
  return plan;
}

}  // namespace

FlatProgram::FlatProgram(const Problem& problem, SignaturePtr sig) : sig_(std::move(sig)) {
  for (std::size_t i = 0; i < problem.clauses.size(); ++i) {
    Entry e{flatten(problem, *sig_, problem.clauses[i], i), {}};
    e.plan = plan_for(e.clause);
    (e.clause.kind == ClauseKind::Goal ? goals_ : definite_).push_back(std::move(e));
  }
}

PredicateTables least_tables(const TreeAutomaton& a, const FlatProgram& program) {
  PredicateTables tables(a.signature_ptr(), a.state_counts());
  const Inhabitation inh = inhabitation(a);
  std::vector<State> tuple;
  std::vector<std::vector<State>> fresh;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& entry : program.definite()) {
      const auto& head = *entry.clause.head;
      fresh.clear();
      for_each_body_match(entry, a, tables, inh, [&](const StateAssignment& s) {
        tuple.clear();
        for (auto v : head.args) tuple.push_back(s[v]);
        if (!tables.contains(head.pred, tuple)) fresh.push_back(tuple);
        return true;
      });
      for (const auto& t : fresh) changed = tables.insert(head.pred, t) || changed;
    }
  }
  return tables;
}

PredicateTables least_tables(const TreeAutomaton& a, const Problem& problem) {
  FlatProgram program(problem, a.signature_ptr());
  return least_tables(a, program);
}

std::optional<Verdict::Witness> find_goal_violation(const TreeAutomaton& a, const PredicateTables& tables,
                                                    const Inhabitation& inh, const FlatProgram& program) {
  for (const auto& entry : program.goals()) {
    std::optional<Verdict::Witness> found;
    for_each_body_match(entry, a, tables, inh, [&](const StateAssignment& s) {
      found = Verdict::Witness{Verdict::Reason::GoalViolation, entry.clause.source, s};
      return false;
    });
    if (found) return found;
  }
  return std::nullopt;
}

Verdict check_model(const TreeAutomaton& a, const PredicateTables& tables, const FlatProgram& program) {
  const Inhabitation inh = inhabitation(a);
  std::vector<State> tuple;
  for (const auto& entry : program.definite()) {
    const auto& head = *entry.clause.head;
    std::optional<Verdict::Witness> found;
    for_each_body_match(entry, a, tables, inh, [&](const StateAssignment& s) {
      tuple.clear();
      for (auto v : head.args) tuple.push_back(s[v]);
      if (tables.contains(head.pred, tuple)) return true;
      found = Verdict::Witness{Verdict::Reason::ClosureViolation, entry.clause.source, s};
      return false;
    });
    if (found) return {found};
  }
  return {find_goal_violation(a, tables, inh, program)};
}

Verdict check_model(const TreeAutomaton& a, const PredicateTables& tables, const Problem& problem) {
  FlatProgram program(problem, a.signature_ptr());
  return check_model(a, tables, program);
}

bool witness_holds(const TreeAutomaton& a, const PredicateTables& tables, const FlatProgram& program,
                   const Verdict::Witness& w) {
  const FlatProgram::Entry* entry = nullptr;
  for (const auto* list : {&program.definite(), &program.goals()})
    for (const auto& e : *list)
      if (e.clause.source == w.clause) entry = &e;
  if (!entry || entry->clause.trivially_false) return false;
  const FlatClause& fc = entry->clause;
  if (w.assignment.size() != fc.var_sorts.size()) return false;
  for (auto v : fc.live_vars)
    if (w.assignment[v] < 1 || w.assignment[v] > a.state_count(fc.var_sorts[v])) return false;

  const Inhabitation inh = inhabitation(a);
  std::vector<State> args;
  for (const auto& t : fc.transitions) {
    args.clear();
    for (auto v : t.args) args.push_back(w.assignment[v]);
    if (a.target(t.ctor, args) != w.assignment[t.result]) return false;
  }
  for (const auto& p : fc.predicates) {
    args.clear();
    for (auto v : p.args) args.push_back(w.assignment[v]);
    if (!tables.contains(p.pred, args)) return false;
  }
  for (const auto& [l, r] : fc.disequalities)
    if (!diff_approx(inh, fc.var_sorts[l], w.assignment[l], w.assignment[r])) return false;

  if (w.reason == Verdict::Reason::GoalViolation) return fc.kind == ClauseKind::Goal;
  if (fc.kind != ClauseKind::Definite) return false;
  args.clear();
  for (auto v : fc.head->args) args.push_back(w.assignment[v]);
  return !tables.contains(fc.head->pred, args);
}

bool interpret_atom(const TreeAutomaton& a, const PredicateTables& tables, const Atom& atom) {
  auto p = a.signature().predicate_index(atom.predicate);
  if (!p) throw std::invalid_argument("unknown predicate " + atom.predicate);
  std::vector<State> tuple;
  for (const auto& t : atom.args) tuple.push_back(run_term(a, t));
  return tables.contains(*p, tuple);
}

}  // namespace regmod
