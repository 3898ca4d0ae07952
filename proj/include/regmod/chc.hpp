#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace regmod {

struct ConstructorDecl {
  std::string name;
  std::vector<std::string> arg_sorts;

  friend bool operator==(const ConstructorDecl&, const ConstructorDecl&) = default;
};

struct SortDecl {
  std::string name;
  std::vector<ConstructorDecl> constructors;

  friend bool operator==(const SortDecl&, const SortDecl&) = default;
};

struct PredicateDecl {
  std::string name;
  std::vector<std::string> arg_sorts;

  friend bool operator==(const PredicateDecl&, const PredicateDecl&) = default;
};

/// A first-order term over the constructor signature.  Variables carry their
/// declared sort; the sort of an application is the result sort of its
/// constructor and is recovered from the signature when needed.
struct Term {
  enum class Kind : std::uint8_t { Var, App };

  Kind kind = Kind::App;
  std::string name;
  std::string sort;  // set for variables only
  std::vector<Term> args;

  static Term var(std::string name, std::string sort);
  static Term app(std::string ctor, std::vector<Term> args = {});

  bool is_var() const { return kind == Kind::Var; }
  bool is_ground() const;
  /// Constructor nesting depth: constants have depth 0.
  std::size_t depth() const;
  std::string to_string() const;

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator<(const Term& a, const Term& b);
};

struct Atom {
  std::string predicate;
  std::vector<Term> args;

  std::string to_string() const;

  friend bool operator==(const Atom& a, const Atom& b) = default;
  friend bool operator<(const Atom& a, const Atom& b);
};

struct Literal {
  enum class Kind : std::uint8_t { Atom, Eq, Diseq };

  Kind kind = Kind::Atom;
  std::string predicate;   // Atom only
  std::vector<Term> args;  // Eq/Diseq: exactly two operands

  static Literal atom(std::string predicate, std::vector<Term> args);
  static Literal atom(const Atom& a) { return atom(a.predicate, a.args); }
  static Literal eq(Term lhs, Term rhs);
  static Literal diseq(Term lhs, Term rhs);

  Atom as_atom() const { return {predicate, args}; }
  std::string to_string() const;

  friend bool operator==(const Literal&, const Literal&) = default;
};

struct VarDecl {
  std::string name;
  std::string sort;

  friend bool operator==(const VarDecl&, const VarDecl&) = default;
};

enum class ClauseKind : std::uint8_t { Definite, Goal };

/// `forall vars. body => head` for definite clauses, `body => false` for
/// goals.  The binder list keeps declaration order, which fixes the numbering
/// of state variables after flattening.
struct Clause {
  ClauseKind kind = ClauseKind::Definite;
  std::vector<VarDecl> vars;
  std::optional<Atom> head;
  std::vector<Literal> body;

  bool is_goal() const { return kind == ClauseKind::Goal; }
  std::string to_string() const;

  friend bool operator==(const Clause&, const Clause&) = default;
};

struct Problem {
  std::vector<SortDecl> sorts;
  std::vector<PredicateDecl> predicates;
  std::vector<Clause> clauses;

  const SortDecl* find_sort(const std::string& name) const;
  const PredicateDecl* find_predicate(const std::string& name) const;
  /// Returns the declaring sort and the constructor, or nulls.
  std::pair<const SortDecl*, const ConstructorDecl*> find_constructor(const std::string& name) const;
  std::size_t goal_count() const;

  friend bool operator==(const Problem&, const Problem&) = default;
};

struct Diagnostic {
  enum class Code : std::uint8_t {
    UndeclaredSort,
    UninhabitedSort,
    DuplicateName,
    NameClash,
    UndeclaredConstructor,
    UndeclaredPredicate,
    ArityMismatch,
    SortMismatch,
    UnboundVariable,
    MalformedClause,
    MissingGoal,  // warning
  };

  Code code;
  std::string message;
  bool warning = false;
};

struct ValidationReport {
  std::vector<Diagnostic> entries;

  bool ok() const;
  bool has(Diagnostic::Code code) const;
  std::vector<Diagnostic> errors() const;
  std::vector<Diagnostic> warnings() const;
  std::string to_string() const;
};

ValidationReport validate(const Problem& problem);

/// Sort of a term in the context of a problem; throws on ill-sorted input.
std::string sort_of(const Problem& problem, const Term& term);

class BudgetExceeded : public std::runtime_error {
 public:
  enum class Reason : std::uint8_t { Atoms, Nodes, Time };
  BudgetExceeded(Reason reason, const std::string& what)
      : std::runtime_error(what), reason_(reason) {}
  Reason reason() const { return reason_; }

 private:
  Reason reason_;
};

using Substitution = std::map<std::string, Term>;

Term apply(const Substitution& subst, const Term& term);
Atom apply(const Substitution& subst, const Atom& atom);

/// One node of a ground proof: `atom` is the head of clause `clause` under
/// `subst`, and `premises` prove its body atoms in body order.  A node with
/// clause == npos is an assumption (the atom was supplied, not derived).
struct ProofTree {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  Atom atom;
  std::size_t clause = npos;
  Substitution subst;
  std::vector<ProofTree> premises;

  bool is_assumption() const { return clause == npos; }
};

/// A ground counterexample: an instance of goal clause `goal` whose body atoms
/// are each justified by a proof tree.
struct Derivation {
  std::size_t goal = 0;
  Substitution subst;
  std::vector<ProofTree> proofs;
};

/// Ground terms of depth <= bound for every sort, in nondecreasing depth order.
class Universe {
 public:
  Universe(const Problem& problem, std::size_t depth_bound);

  const std::vector<Term>& terms(const std::string& sort) const;
  std::size_t depth_bound() const { return depth_bound_; }

 private:
  std::size_t depth_bound_;
  std::map<std::string, std::vector<Term>> terms_;
};

/// Ground atoms derivable within the depth bound, each with the first
/// derivation found.
struct GroundModel {
  struct Justification {
    std::size_t clause;
    Substitution subst;
    std::vector<Atom> premises;
  };

  std::size_t depth_bound = 0;
  std::set<Atom> atoms;
  std::map<Atom, Justification> why;

  ProofTree proof(const Atom& atom) const;
};

inline constexpr std::size_t kDefaultAtomCap = 2'000'000;

GroundModel derive_ground_model(const Problem& problem, std::size_t depth_bound,
                                std::size_t atom_cap = kDefaultAtomCap);

std::set<Atom> ground_least_model(const Problem& problem, std::size_t depth_bound,
                                  std::size_t atom_cap = kDefaultAtomCap);

/// Searches for a goal instance whose body atoms all lie in `atoms`.  Variables
/// not bound by body atoms range over ground terms up to one level deeper than
/// the deepest term in `atoms`; proofs are assumptions.
std::optional<Derivation> goal_violated(const Problem& problem, const std::set<Atom>& atoms);

/// Same search against a derived model: unbound variables range over the
/// model's universe and body atoms carry their proof trees.
std::optional<Derivation> goal_violated(const Problem& problem, const GroundModel& model);

/// Independent re-check of a derivation: every proof node must instantiate
/// its clause exactly, every Eq/Diseq must hold syntactically, and no
/// assumptions may occur.
bool replay_derivation(const Problem& problem, const Derivation& derivation,
                       std::string* why_not = nullptr);

std::string render_derivation(const Problem& problem, const Derivation& derivation);

}  // namespace regmod
