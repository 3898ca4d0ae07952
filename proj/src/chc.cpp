#include "regmod/chc.hpp"

#include "odometer.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <tuple>

namespace regmod {

// ---------------------------------------------------------------------------
// Terms, atoms, literals

Term Term::var(std::string name, std::string sort) {
  Term t;
  t.kind = Kind::Var;
  t.name = std::move(name);
  t.sort = std::move(sort);
  return t;
}

Term Term::app(std::string ctor, std::vector<Term> args) {
  Term t;
  t.kind = Kind::App;
  t.name = std::move(ctor);
  t.args = std::move(args);
  return t;
}

bool Term::is_ground() const {
  if (is_var()) return false;
  return std::all_of(args.begin(), args.end(), [](const Term& a) { return a.is_ground(); });
}

std::size_t Term::depth() const {
  std::size_t d = 0;
  for (const auto& a : args) d = std::max(d, a.depth() + 1);
  return d;
}

std::string Term::to_string() const {
  if (is_var() || args.empty()) return name;
  std::string out = name + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ",";
    out += args[i].to_string();
  }
  return out + ")";
}

bool operator==(const Term& a, const Term& b) {
  return a.kind == b.kind && a.name == b.name && a.sort == b.sort && a.args == b.args;
}

bool operator<(const Term& a, const Term& b) {
  if (a.kind != b.kind) return a.kind < b.kind;
  if (a.name != b.name) return a.name < b.name;
  if (a.sort != b.sort) return a.sort < b.sort;
  return std::lexicographical_compare(a.args.begin(), a.args.end(), b.args.begin(), b.args.end());
}

std::string Atom::to_string() const {
  if (args.empty()) return predicate;
  std::string out = predicate + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ",";
    out += args[i].to_string();
  }
  return out + ")";
}

bool operator<(const Atom& a, const Atom& b) {
  return std::tie(a.predicate, a.args) < std::tie(b.predicate, b.args);
}

Literal Literal::atom(std::string predicate, std::vector<Term> args) {
  return {Kind::Atom, std::move(predicate), std::move(args)};
}

Literal Literal::eq(Term lhs, Term rhs) {
  return {Kind::Eq, {}, {std::move(lhs), std::move(rhs)}};
}

Literal Literal::diseq(Term lhs, Term rhs) {
  return {Kind::Diseq, {}, {std::move(lhs), std::move(rhs)}};
}

std::string Literal::to_string() const {
  switch (kind) {
    case Kind::Atom:
      return as_atom().to_string();
    case Kind::Eq:
      return args[0].to_string() + " = " + args[1].to_string();
    case Kind::Diseq:
      return args[0].to_string() + " != " + args[1].to_string();
  }
  return {};
}

std::string Clause::to_string() const {
  std::string out = head ? head->to_string() : std::string("false");
  if (!body.empty()) {
    out += " :- ";
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (i) out += ", ";
      out += body[i].to_string();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Problem lookups and validation

const SortDecl* Problem::find_sort(const std::string& name) const {
  for (const auto& s : sorts)
    if (s.name == name) return &s;
  return nullptr;
}

const PredicateDecl* Problem::find_predicate(const std::string& name) const {
  for (const auto& p : predicates)
    if (p.name == name) return &p;
  return nullptr;
}

std::pair<const SortDecl*, const ConstructorDecl*> Problem::find_constructor(
    const std::string& name) const {
  for (const auto& s : sorts)
    for (const auto& c : s.constructors)
      if (c.name == name) return {&s, &c};
  return {nullptr, nullptr};
}

std::size_t Problem::goal_count() const {
  return static_cast<std::size_t>(
      std::count_if(clauses.begin(), clauses.end(), [](const Clause& c) { return c.is_goal(); }));
}

bool ValidationReport::ok() const {
  return std::none_of(entries.begin(), entries.end(), [](const Diagnostic& d) { return !d.warning; });
}

bool ValidationReport::has(Diagnostic::Code code) const {
  return std::any_of(entries.begin(), entries.end(),
                     [code](const Diagnostic& d) { return d.code == code; });
}

std::vector<Diagnostic> ValidationReport::errors() const {
  std::vector<Diagnostic> out;
  for (const auto& d : entries)
    if (!d.warning) out.push_back(d);
  return out;
}

std::vector<Diagnostic> ValidationReport::warnings() const {
  std::vector<Diagnostic> out;
  for (const auto& d : entries)
    if (d.warning) out.push_back(d);
  return out;
}

std::string ValidationReport::to_string() const {
  std::string out;
  for (const auto& d : entries) {
    out += d.warning ? "warning: " : "error: ";
    out += d.message;
    out += '\n';
  }
  return out;
}

namespace {

class ClauseChecker {
 public:
  ClauseChecker(const Problem& problem, ValidationReport& report, std::size_t index)
      : problem_(problem), report_(report), where_("clause " + std::to_string(index) + ": ") {}

  void check(const Clause& clause) {
    for (const auto& v : clause.vars) {
      if (!problem_.find_sort(v.sort))
        error(Diagnostic::Code::UndeclaredSort, "variable " + v.name + " has undeclared sort " + v.sort);
      if (!binders_.emplace(v.name, v.sort).second)
        error(Diagnostic::Code::DuplicateName, "variable " + v.name + " bound twice");
    }
    if (clause.is_goal() && clause.head)
      error(Diagnostic::Code::MalformedClause, "goal clause with a head");
    if (!clause.is_goal() && !clause.head)
      error(Diagnostic::Code::MalformedClause, "definite clause without a head");
    if (clause.head) check_atom(*clause.head);
    for (const auto& lit : clause.body) {
      if (lit.kind == Literal::Kind::Atom) {
        check_atom(lit.as_atom());
        continue;
      }
      if (lit.args.size() != 2) {
        error(Diagnostic::Code::MalformedClause, "(dis)equality needs two operands");
        continue;
      }
      auto l = check_term(lit.args[0]);
      auto r = check_term(lit.args[1]);
      if (l && r && *l != *r)
        error(Diagnostic::Code::SortMismatch, "operands of " + lit.to_string() + " have sorts " + *l +
                                                  " and " + *r);
    }
  }

 private:
  void error(Diagnostic::Code code, const std::string& msg) {
    report_.entries.push_back({code, where_ + msg, false});
  }

  void check_atom(const Atom& atom) {
    const auto* pred = problem_.find_predicate(atom.predicate);
    if (!pred) {
      error(Diagnostic::Code::UndeclaredPredicate, "undeclared predicate " + atom.predicate);
      for (const auto& a : atom.args) check_term(a);
      return;
    }
    if (pred->arg_sorts.size() != atom.args.size()) {
      error(Diagnostic::Code::ArityMismatch, "predicate " + atom.predicate + " expects " +
                                                 std::to_string(pred->arg_sorts.size()) + " arguments");
      return;
    }
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
      auto s = check_term(atom.args[i]);
      if (s && *s != pred->arg_sorts[i])
        error(Diagnostic::Code::SortMismatch, "argument " + std::to_string(i + 1) + " of " +
                                                  atom.predicate + " has sort " + *s + ", expected " +
                                                  pred->arg_sorts[i]);
    }
  }

  std::optional<std::string> check_term(const Term& t) {
    if (t.is_var()) {
      auto it = binders_.find(t.name);
      if (it == binders_.end()) {
        error(Diagnostic::Code::UnboundVariable, "variable " + t.name + " is not bound");
        return std::nullopt;
      }
      if (!t.sort.empty() && t.sort != it->second) {
        error(Diagnostic::Code::SortMismatch,
              "variable " + t.name + " used at sort " + t.sort + " but bound at " + it->second);
        return std::nullopt;
      }
      return it->second;
    }
    auto [sort, ctor] = problem_.find_constructor(t.name);
    if (!ctor) {
      error(Diagnostic::Code::UndeclaredConstructor, "undeclared constructor " + t.name);
      return std::nullopt;
    }
    if (ctor->arg_sorts.size() != t.args.size()) {
      error(Diagnostic::Code::ArityMismatch, "constructor " + t.name + " expects " +
                                                 std::to_string(ctor->arg_sorts.size()) + " arguments");
      return sort->name;
    }
    for (std::size_t i = 0; i < t.args.size(); ++i) {
      auto s = check_term(t.args[i]);
      if (s && *s != ctor->arg_sorts[i])
        error(Diagnostic::Code::SortMismatch, "argument " + std::to_string(i + 1) + " of " + t.name +
                                                  " has sort " + *s + ", expected " + ctor->arg_sorts[i]);
    }
    return sort->name;
  }

  const Problem& problem_;
  ValidationReport& report_;
  std::string where_;
  std::map<std::string, std::string> binders_;
};

}  // namespace

ValidationReport validate(const Problem& problem) {
  ValidationReport report;
  auto err = [&](Diagnostic::Code code, std::string msg) {
    report.entries.push_back({code, std::move(msg), false});
  };

  std::set<std::string> sort_names, ctor_names, pred_names;
  for (const auto& s : problem.sorts) {
    if (!sort_names.insert(s.name).second) err(Diagnostic::Code::DuplicateName, "sort " + s.name + " declared twice");
  }
  for (const auto& s : problem.sorts) {
    for (const auto& c : s.constructors) {
      if (!ctor_names.insert(c.name).second)
        err(Diagnostic::Code::DuplicateName, "constructor " + c.name + " declared twice");
      for (const auto& a : c.arg_sorts)
        if (!sort_names.count(a))
          err(Diagnostic::Code::UndeclaredSort, "constructor " + c.name + " uses undeclared sort " + a);
    }
  }
  for (const auto& p : problem.predicates) {
    if (!pred_names.insert(p.name).second)
      err(Diagnostic::Code::DuplicateName, "predicate " + p.name + " declared twice");
    if (ctor_names.count(p.name))
      err(Diagnostic::Code::NameClash, "predicate " + p.name + " clashes with a constructor");
    for (const auto& a : p.arg_sorts)
      if (!sort_names.count(a))
        err(Diagnostic::Code::UndeclaredSort, "predicate " + p.name + " uses undeclared sort " + a);
  }

  // Inhabitation: least fixpoint of "some constructor has all-inhabited args".
  std::set<std::string> inhabited;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& s : problem.sorts) {
      if (inhabited.count(s.name)) continue;
      for (const auto& c : s.constructors) {
        bool ok = std::all_of(c.arg_sorts.begin(), c.arg_sorts.end(),
                              [&](const std::string& a) { return inhabited.count(a) > 0; });
        if (ok) {
          inhabited.insert(s.name);
          changed = true;
          break;
        }
      }
    }
  }
  for (const auto& s : problem.sorts)
    if (!inhabited.count(s.name))
      err(Diagnostic::Code::UninhabitedSort, "sort " + s.name + " has no finite ground term");

  for (std::size_t i = 0; i < problem.clauses.size(); ++i) {
    ClauseChecker checker(problem, report, i);
    checker.check(problem.clauses[i]);
  }

  if (problem.goal_count() == 0)
    report.entries.push_back({Diagnostic::Code::MissingGoal, "problem has no goal clause", true});
  return report;
}

std::string sort_of(const Problem& problem, const Term& term) {
  if (term.is_var()) return term.sort;
  auto [sort, ctor] = problem.find_constructor(term.name);
  if (!sort) throw std::invalid_argument("undeclared constructor " + term.name);
  return sort->name;
}

// ---------------------------------------------------------------------------
// Substitutions

Term apply(const Substitution& subst, const Term& term) {
  if (term.is_var()) {
    auto it = subst.find(term.name);
    return it == subst.end() ? term : it->second;
  }
  Term out = Term::app(term.name);
  out.args.reserve(term.args.size());
  for (const auto& a : term.args) out.args.push_back(regmod::apply(subst, a));
  return out;
}

Atom apply(const Substitution& subst, const Atom& atom) {
  Atom out{atom.predicate, {}};
  out.args.reserve(atom.args.size());
  for (const auto& a : atom.args) out.args.push_back(regmod::apply(subst, a));
  return out;
}

namespace {

bool match(const Term& pattern, const Term& ground, Substitution& subst) {
  if (pattern.is_var()) {
    auto [it, inserted] = subst.emplace(pattern.name, ground);
    return inserted || it->second == ground;
  }
  if (pattern.name != ground.name || pattern.args.size() != ground.args.size()) return false;
  for (std::size_t i = 0; i < pattern.args.size(); ++i)
    if (!match(pattern.args[i], ground.args[i], subst)) return false;
  return true;
}

void collect_vars(const Term& t, std::set<std::string>& out) {
  if (t.is_var()) {
    out.insert(t.name);
    return;
  }
  for (const auto& a : t.args) collect_vars(a, out);
}

std::set<std::string> clause_vars(const Clause& clause) {
  std::set<std::string> out;
  if (clause.head)
    for (const auto& a : clause.head->args) collect_vars(a, out);
  for (const auto& lit : clause.body)
    for (const auto& a : lit.args) collect_vars(a, out);
  return out;
}

std::string binder_sort(const Clause& clause, const std::string& var) {
  for (const auto& v : clause.vars)
    if (v.name == var) return v.sort;
  throw std::invalid_argument("variable " + var + " is not bound");
}

using FactIndex = std::map<std::string, std::vector<const Atom*>>;

FactIndex index_facts(const std::set<Atom>& atoms) {
  FactIndex idx;
  for (const auto& a : atoms) idx[a.predicate].push_back(&a);
  return idx;
}

/// Enumerates ground substitutions satisfying a clause body against a fact
/// set.  Body atoms are joined in order; equalities with one bound side bind
/// the other; remaining variables range over `universe`.
class BodyMatcher {
 public:
  using Callback = std::function<bool(const Substitution&, const std::vector<const Atom*>&)>;

  BodyMatcher(const Clause& clause, const FactIndex& facts, const Universe& universe)
      : clause_(clause), facts_(facts), universe_(universe) {
    for (const auto& lit : clause.body)
      if (lit.kind == Literal::Kind::Atom) atoms_.push_back(&lit);
    auto vars = clause_vars(clause);
    vars_.assign(vars.begin(), vars.end());
    // Keep binder order for the free-variable enumeration.
    std::stable_sort(vars_.begin(), vars_.end(), [&](const std::string& a, const std::string& b) {
      return binder_pos(a) < binder_pos(b);
    });
  }

  /// Returns false if the callback stopped the enumeration.
  bool run(const Callback& cb) {
    Substitution subst;
    std::vector<const Atom*> used;
    return join(0, subst, used, cb);
  }

 private:
  std::size_t binder_pos(const std::string& v) const {
    for (std::size_t i = 0; i < clause_.vars.size(); ++i)
      if (clause_.vars[i].name == v) return i;
    return clause_.vars.size();
  }

  bool join(std::size_t i, Substitution& subst, std::vector<const Atom*>& used, const Callback& cb) {
    if (i == atoms_.size()) {
      Substitution s = subst;
      propagate_equalities(s);
      std::vector<std::string> free;
      for (const auto& v : vars_)
        if (!s.count(v)) free.push_back(v);
      return enumerate_free(free, 0, s, used, cb);
    }
    const Literal& lit = *atoms_[i];
    auto it = facts_.find(lit.predicate);
    if (it == facts_.end()) return true;
    for (const Atom* fact : it->second) {
      if (fact->args.size() != lit.args.size()) continue;
      Substitution next = subst;
      bool ok = true;
      for (std::size_t k = 0; ok && k < lit.args.size(); ++k) ok = match(lit.args[k], fact->args[k], next);
      if (!ok) continue;
      used.push_back(fact);
      bool cont = join(i + 1, next, used, cb);
      used.pop_back();
      if (!cont) return false;
    }
    return true;
  }

  void propagate_equalities(Substitution& s) const {
    for (bool changed = true; changed;) {
      changed = false;
      for (const auto& lit : clause_.body) {
        if (lit.kind != Literal::Kind::Eq) continue;
        for (int side = 0; side < 2; ++side) {
          const Term& lhs = lit.args[side];
          if (!lhs.is_var() || s.count(lhs.name)) continue;
          Term rhs = regmod::apply(s, lit.args[1 - side]);
          if (!rhs.is_ground() || rhs.depth() > universe_.depth_bound()) continue;
          s.emplace(lhs.name, std::move(rhs));
          changed = true;
        }
      }
    }
  }

  bool enumerate_free(const std::vector<std::string>& free, std::size_t k, Substitution& s,
                      std::vector<const Atom*>& used, const Callback& cb) {
    if (k == free.size()) {
      if (!constraints_hold(s)) return true;
      return cb(s, used);
    }
    const auto& terms = universe_.terms(binder_sort(clause_, free[k]));
    for (const auto& t : terms) {
      s[free[k]] = t;
      if (!enumerate_free(free, k + 1, s, used, cb)) {
        s.erase(free[k]);
        return false;
      }
    }
    s.erase(free[k]);
    return true;
  }

  bool constraints_hold(const Substitution& s) const {
    for (const auto& lit : clause_.body) {
      if (lit.kind == Literal::Kind::Atom) continue;
      bool equal = regmod::apply(s, lit.args[0]) == regmod::apply(s, lit.args[1]);
      if ((lit.kind == Literal::Kind::Eq) != equal) return false;
    }
    return true;
  }

  const Clause& clause_;
  const FactIndex& facts_;
  const Universe& universe_;
  std::vector<const Literal*> atoms_;
  std::vector<std::string> vars_;
};

std::size_t max_depth(const std::set<Atom>& atoms) {
  std::size_t d = 0;
  for (const auto& a : atoms)
    for (const auto& t : a.args) d = std::max(d, t.depth());
  return d;
}

}  // namespace

// ---------------------------------------------------------------------------
// Universe and bottom-up evaluation

Universe::Universe(const Problem& problem, std::size_t depth_bound) : depth_bound_(depth_bound) {
  for (const auto& s : problem.sorts) terms_[s.name];
  // Layer d holds the terms of depth exactly d.
  std::map<std::string, std::vector<std::vector<Term>>> layers;
  for (std::size_t d = 0; d <= depth_bound; ++d) {
    std::map<std::string, std::vector<Term>> fresh;
    for (const auto& s : problem.sorts) {
      for (const auto& c : s.constructors) {
        if (c.arg_sorts.empty()) {
          if (d == 0) fresh[s.name].push_back(Term::app(c.name));
          continue;
        }
        if (d == 0) continue;
        // All argument combinations over terms of depth < d with at least one
        // argument of depth exactly d - 1.
        std::vector<const std::vector<Term>*> pools;
        std::vector<std::size_t> radix;
        for (const auto& a : c.arg_sorts) {
          pools.push_back(&terms_[a]);
          radix.push_back(pools.back()->size());
        }
        if (std::find(radix.begin(), radix.end(), 0) != radix.end()) continue;
        std::vector<std::size_t> idx(pools.size(), 0);
        do {
          std::vector<Term> args;
          std::size_t deepest = 0;
          for (std::size_t k = 0; k < pools.size(); ++k) {
            args.push_back((*pools[k])[idx[k]]);
            deepest = std::max(deepest, args.back().depth());
          }
          if (deepest + 1 == d) fresh[s.name].push_back(Term::app(c.name, std::move(args)));
        } while (detail::advance(idx, radix));
      }
    }
    for (auto& [sort, ts] : fresh)
      for (auto& t : ts) terms_[sort].push_back(std::move(t));
  }
}

const std::vector<Term>& Universe::terms(const std::string& sort) const {
  static const std::vector<Term> empty;
  auto it = terms_.find(sort);
  return it == terms_.end() ? empty : it->second;
}

ProofTree GroundModel::proof(const Atom& atom) const {
  ProofTree node;
  node.atom = atom;
  auto it = why.find(atom);
  if (it == why.end()) return node;
  node.clause = it->second.clause;
  node.subst = it->second.subst;
  for (const auto& p : it->second.premises) node.premises.push_back(proof(p));
  return node;
}

GroundModel derive_ground_model(const Problem& problem, std::size_t depth_bound, std::size_t atom_cap) {
  GroundModel model;
  model.depth_bound = depth_bound;
  Universe universe(problem, depth_bound);

  for (bool changed = true; changed;) {
    changed = false;
    FactIndex facts = index_facts(model.atoms);
    std::map<Atom, GroundModel::Justification> fresh;
    for (std::size_t ci = 0; ci < problem.clauses.size(); ++ci) {
      const Clause& clause = problem.clauses[ci];
      if (clause.is_goal() || !clause.head) continue;
      BodyMatcher matcher(clause, facts, universe);
      matcher.run([&](const Substitution& s, const std::vector<const Atom*>& used) {
        Atom head = regmod::apply(s, *clause.head);
        for (const auto& a : head.args)
          if (a.depth() > depth_bound) return true;
        if (model.atoms.count(head) || fresh.count(head)) return true;
        GroundModel::Justification j{ci, s, {}};
        for (const Atom* p : used) j.premises.push_back(*p);
        fresh.emplace(std::move(head), std::move(j));
        if (model.atoms.size() + fresh.size() > atom_cap)
          throw BudgetExceeded(BudgetExceeded::Reason::Atoms,
                               "ground model exceeds " + std::to_string(atom_cap) + " atoms");
        return true;
      });
    }
    for (auto& [atom, j] : fresh) {
      model.atoms.insert(atom);
      model.why.emplace(atom, std::move(j));
      changed = true;
    }
  }
  return model;
}

std::set<Atom> ground_least_model(const Problem& problem, std::size_t depth_bound, std::size_t atom_cap) {
  return derive_ground_model(problem, depth_bound, atom_cap).atoms;
}

namespace {

std::optional<Derivation> find_goal_instance(const Problem& problem, const std::set<Atom>& atoms,
                                             const Universe& universe, const GroundModel* model) {
  FactIndex facts = index_facts(atoms);
  for (std::size_t ci = 0; ci < problem.clauses.size(); ++ci) {
    const Clause& clause = problem.clauses[ci];
    if (!clause.is_goal()) continue;
    std::optional<Derivation> found;
    BodyMatcher matcher(clause, facts, universe);
    matcher.run([&](const Substitution& s, const std::vector<const Atom*>& used) {
      Derivation d;
      d.goal = ci;
      d.subst = s;
      for (const Atom* a : used) {
        if (model) {
          d.proofs.push_back(model->proof(*a));
        } else {
          ProofTree leaf;
          leaf.atom = *a;
          d.proofs.push_back(std::move(leaf));
        }
      }
      found = std::move(d);
      return false;
    });
    if (found) return found;
  }
  return std::nullopt;
}

}  // namespace

std::optional<Derivation> goal_violated(const Problem& problem, const std::set<Atom>& atoms) {
  Universe universe(problem, atoms.empty() ? 1 : max_depth(atoms) + 1);
  return find_goal_instance(problem, atoms, universe, nullptr);
}

std::optional<Derivation> goal_violated(const Problem& problem, const GroundModel& model) {
  Universe universe(problem, model.depth_bound);
  return find_goal_instance(problem, model.atoms, universe, &model);
}

// ---------------------------------------------------------------------------
// Replay

namespace {

class Replayer {
 public:
  explicit Replayer(const Problem& problem) : problem_(problem) {}

  bool check_goal(const Derivation& d) {
    if (d.goal >= problem_.clauses.size()) return fail("goal index out of range");
    const Clause& clause = problem_.clauses[d.goal];
    if (!clause.is_goal()) return fail("clause " + std::to_string(d.goal) + " is not a goal");
    return check_body(clause, d.subst, d.proofs);
  }

  std::string reason;

 private:
  bool fail(std::string why) {
    if (reason.empty()) reason = std::move(why);
    return false;
  }

  bool check_subst(const Clause& clause, const Substitution& subst) {
    for (const auto& v : clause_vars(clause)) {
      auto it = subst.find(v);
      if (it == subst.end()) return fail("variable " + v + " unassigned");
      if (!it->second.is_ground()) return fail("variable " + v + " bound to a non-ground term");
      if (sort_of(problem_, it->second) != binder_sort(clause, v))
        return fail("variable " + v + " bound to a term of the wrong sort");
    }
    return true;
  }

  bool check_body(const Clause& clause, const Substitution& subst, const std::vector<ProofTree>& proofs) {
    if (!check_subst(clause, subst)) return false;
    std::size_t k = 0;
    for (const auto& lit : clause.body) {
      if (lit.kind == Literal::Kind::Atom) {
        if (k >= proofs.size()) return fail("missing premise for " + lit.to_string());
        if (regmod::apply(subst, lit.as_atom()) != proofs[k].atom)
          return fail("premise " + proofs[k].atom.to_string() + " does not match " + lit.to_string());
        if (!check_node(proofs[k])) return false;
        ++k;
        continue;
      }
      bool equal = regmod::apply(subst, lit.args[0]) == regmod::apply(subst, lit.args[1]);
      if ((lit.kind == Literal::Kind::Eq) != equal) return fail("constraint " + lit.to_string() + " fails");
    }
    if (k != proofs.size()) return fail("extra premises");
    return true;
  }

  bool check_node(const ProofTree& node) {
    if (node.is_assumption()) return fail("atom " + node.atom.to_string() + " is assumed, not derived");
    if (node.clause >= problem_.clauses.size()) return fail("clause index out of range");
    const Clause& clause = problem_.clauses[node.clause];
    if (clause.is_goal() || !clause.head) return fail("proof uses a goal clause");
    if (regmod::apply(node.subst, *clause.head) != node.atom)
      return fail("head of clause " + std::to_string(node.clause) + " does not yield " + node.atom.to_string());
    return check_body(clause, node.subst, node.premises);
  }

  const Problem& problem_;
};

void render_proof(std::ostringstream& out, const ProofTree& node, int indent) {
  out << std::string(static_cast<std::size_t>(indent), ' ') << node.atom.to_string();
  if (node.is_assumption()) {
    out << "  [assumed]\n";
  } else {
    out << "  [clause " << node.clause;
    for (const auto& [v, t] : node.subst) out << ", " << v << " = " << t.to_string();
    out << "]\n";
  }
  for (const auto& p : node.premises) render_proof(out, p, indent + 2);
}

}  // namespace

bool replay_derivation(const Problem& problem, const Derivation& derivation, std::string* why_not) {
  Replayer r(problem);
  bool ok = false;
  try {
    ok = r.check_goal(derivation);
  } catch (const std::exception& e) {
    r.reason = e.what();
  }
  if (!ok && why_not) *why_not = r.reason;
  return ok;
}

std::string render_derivation(const Problem& problem, const Derivation& derivation) {
  std::ostringstream out;
  const Clause& goal = problem.clauses.at(derivation.goal);
  Clause instance = goal;
  for (auto& lit : instance.body)
    for (auto& a : lit.args) a = regmod::apply(derivation.subst, a);
  out << "Goal clause " << derivation.goal << " is violated by the instance\n  " << instance.to_string() << "\n";
  if (!derivation.subst.empty()) {
    out << "with";
    for (const auto& [v, t] : derivation.subst) out << " " << v << " = " << t.to_string() << ";";
    out << "\n";
  }
  out << "Derivation:\n";
  for (const auto& p : derivation.proofs) render_proof(out, p, 2);
  return out.str();
}

}  // namespace regmod
