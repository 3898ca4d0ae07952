#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "regmod/automaton.hpp"
#include "regmod/chc.hpp"

namespace regmod {

/// ASP spellings of the signature's names.  A name is kept when it is a
/// plain lowercase identifier that does not collide with a symbol of the
/// encoding; otherwise it gets the prefix `c_` (plus a numeric suffix if the
/// escaped form is still taken).
class NameTable {
 public:
  explicit NameTable(const Signature& sig);

  const std::string& sort(std::size_t s) const { return sorts_[s]; }
  const std::string& ctor(std::size_t c) const { return ctors_[c]; }
  const std::string& pred(std::size_t p) const { return preds_[p]; }

  std::optional<std::size_t> sort_of(std::string_view asp) const;
  std::optional<std::size_t> ctor_of(std::string_view asp) const;
  std::optional<std::size_t> pred_of(std::string_view asp) const;

  static bool reserved(std::string_view name);

 private:
  std::vector<std::string> sorts_, ctors_, preds_;
};

struct AspProgram {
  enum class Kind : std::uint8_t { ModelSearch, CounterexampleSearch };

  Kind kind = Kind::ModelSearch;
  std::string text;
  std::vector<std::size_t> max_states;  // ModelSearch
  std::size_t depth_bound = 0;          // CounterexampleSearch
  bool symmetry_breaking = false;
};

/// Model-search program.  Without symmetry breaking this is the plain
/// encoding: every state exists, transitions and tables are guessed.  With it,
/// transitions are only chosen for reachable argument states, tables are the
/// least model of the clauses, reachable states form a prefix 1..m of each
/// sort, and new states appear in first-occurrence order along the slot
/// order (all slots for a single sort, constant slots otherwise).
AspProgram emit_model_search(const Problem& problem, const std::vector<std::size_t>& max_states,
                             bool symmetry_breaking = true);

/// Counterexample program over the ground terms of depth <= depth_bound:
/// `u(S,T,D)` holds when term T of sort S has depth at most D, definite
/// clauses derive ground atoms bottom-up, and some goal instance is required
/// to hold (`cex(I,(X0,...))`).
AspProgram emit_counterexample_search(const Problem& problem, std::size_t depth_bound);

/// Integers and function terms; a tuple is a function with an empty name.
struct AspTerm {
  bool is_number = false;
  long long number = 0;
  std::string name;
  std::vector<AspTerm> args;

  std::string to_string() const;
  friend bool operator==(const AspTerm&, const AspTerm&) = default;
};

struct AnswerSet {
  std::vector<AspTerm> facts;
};

enum class SolverOutcome : std::uint8_t { Satisfiable, Unsatisfiable, Unknown };

class AspError : public std::runtime_error {
 public:
  enum class Kind : std::uint8_t {
    NoAnswerSet,
    MalformedFact,
    IncompleteDelta,
    VerificationFailure,
    SolverNotFound,
    SolverFailed,
  };

  AspError(Kind kind, const std::string& what, std::optional<SolverOutcome> outcome = std::nullopt)
      : std::runtime_error(what), kind_(kind), outcome_(outcome) {}

  Kind kind() const { return kind_; }
  /// For NoAnswerSet: what the output said instead, if recognizable.
  std::optional<SolverOutcome> classification() const { return outcome_; }

 private:
  Kind kind_;
  std::optional<SolverOutcome> outcome_;
};

/// Facts of the first answer set in clingo-style output ("Answer: 1" followed
/// by a line of facts).  Other lines are ignored.
AnswerSet parse_answer_set(std::string_view raw);

/// Parses one line of whitespace-separated facts.
std::vector<AspTerm> parse_facts(std::string_view line);

struct DecodedModel {
  TreeAutomaton automaton;
  PredicateTables tables;
};

/// Rebuilds the automaton and tables from a model-search answer set, trims
/// uninhabited states and re-verifies the result with check_model.
DecodedModel decode_model(const AnswerSet& answers, const Problem& problem);

/// The goal index and substitution of a counterexample answer set.
Derivation decode_counterexample(const AnswerSet& answers, const Problem& problem);

struct SolverConfig {
  std::string solver_path;
  double time_limit = 60.0;      // seconds
  double grace = 2.0;            // extra seconds before the process is killed
  std::vector<std::string> args;
  std::vector<int> sat_codes{10, 30};
  std::vector<int> unsat_codes{20};
};

struct SolverRun {
  SolverOutcome outcome = SolverOutcome::Unknown;
  int exit_status = -1;
  bool timed_out = false;
  double wall_seconds = 0;
  std::string output;
  std::string error_output;
  std::optional<AnswerSet> answer;
};

/// Runs the solver on the program (fed on standard input) and classifies the
/// result by exit code, falling back to the SATISFIABLE / UNSATISFIABLE /
/// UNKNOWN status line when the exit code is not in either list.
SolverRun run_external(const AspProgram& program, const SolverConfig& config);

struct ModelCount {
  std::uint64_t count = 0;
  bool exhaustive = false;  // false when the solver stopped early ("N+")
  double wall_seconds = 0;
};

/// Enumerates all answer sets (`0 --quiet=2`) within the time limit.
ModelCount count_models(const AspProgram& program, const SolverConfig& config);

/// Solver executable: $REGMOD_ASP_SOLVER, then the path configured at build
/// time, then `clingo` on PATH.
std::optional<std::string> find_solver();

}  // namespace regmod
