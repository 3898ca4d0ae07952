#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "regmod/asp.hpp"
#include "regmod/automaton.hpp"
#include "regmod/chc.hpp"

namespace regmod {

enum class Backend : std::uint8_t { Native, Asp };

struct SolveOptions {
  Backend backend = Backend::Native;
  std::size_t max_bound = 6;
  /// Caps the counterexample depth; by default it follows the state bound.
  std::optional<std::size_t> max_depth;
  double time_limit = 0;  // seconds, 0 = none
  bool symmetry_breaking = true;
  std::size_t node_budget = 0;
  std::size_t atom_cap = kDefaultAtomCap;
  std::string solver_path;  // asp backend; empty means find_solver()
};

enum class Phase : std::uint8_t { Counterexample, Model };

struct RunEvent {
  enum class Verdict : std::uint8_t { Found, None, Unknown };

  Phase phase;
  std::size_t bound;
  double seconds;
  Verdict verdict;
};

struct RunLog {
  std::vector<RunEvent> events;
};

struct SolveOutcome {
  enum class Kind : std::uint8_t { Sat, Unsat, Unknown };
  enum class UnknownReason : std::uint8_t { BoundExhausted, Timeout, Budget };

  Kind kind = Kind::Unknown;
  // Sat
  std::optional<TreeAutomaton> automaton;
  std::optional<PredicateTables> tables;
  std::size_t bound = 0;  // state bound (Sat) or depth (Unsat) at which the answer was found
  // Unsat
  std::optional<Derivation> derivation;
  // Unknown
  UnknownReason reason = UnknownReason::BoundExhausted;
  std::string detail;
  double time_limit = 0;
  std::size_t max_bound = 0;
};

/// Called when a phase starts, before it runs.
using PhaseObserver = std::function<void(Phase, std::size_t bound)>;

/// For n = 1..max_bound: counterexample search at depth n, then model search
/// with at most n states per sort.  Stops at the first answer.
std::pair<SolveOutcome, RunLog> solve(const Problem& problem, const SolveOptions& options,
                                      const PhaseObserver& observer = {});

/// member/notMember/rev over elt = a1 | ... | ak.
Problem gen_member_rev(std::size_t k);

std::string phase_line(Phase phase, std::size_t bound);
std::string render_outcome(const SolveOutcome& outcome, const Problem& problem);
/// Machine-readable form of render_outcome plus the run log.
std::string outcome_json(const SolveOutcome& outcome, const RunLog& log, const Problem& problem);

/// Model count of the model-search program at `n` states per sort.
ModelCount count_models_at(const Problem& problem, std::size_t n, bool symmetry_breaking,
                           const SolverConfig& config);

/// Writes model_<n>.lp and counterexample_<n>.lp for n = 1..max_bound;
/// returns the written paths.
std::vector<std::string> emit_programs(const Problem& problem, const SolveOptions& options,
                                       const std::string& dir);

}  // namespace regmod
