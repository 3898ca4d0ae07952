#include "regmod/driver.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "regmod/frontend.hpp"
#include "regmod/interpretation.hpp"
#include "regmod/native.hpp"

namespace regmod {

namespace {

using Seconds = std::chrono::duration<double>;

std::string plural_states(std::size_t n) { return std::to_string(n) + (n == 1 ? " state" : " states"); }

class Solver {
 public:
  Solver(const Problem& problem, const SolveOptions& options, const PhaseObserver& observer)
      : problem_(problem),
        options_(options),
        observer_(observer),
        sig_(std::make_shared<const Signature>(problem)),
        program_(problem, sig_),
        start_(Clock::now()) {
    if (options_.max_bound == 0) throw std::invalid_argument("max_bound must be positive");
    if (options_.time_limit > 0)
      deadline_ = start_ + std::chrono::duration_cast<Clock::duration>(Seconds(options_.time_limit));
    if (options_.backend == Backend::Asp) {
      solver_.solver_path = options_.solver_path;
      if (solver_.solver_path.empty()) {
        auto found = find_solver();
        if (!found) throw AspError(AspError::Kind::SolverNotFound, "no ASP solver found (set --solver-path)");
        solver_.solver_path = *found;
      }
    }
  }

  std::pair<SolveOutcome, RunLog> run() {
    SolveOutcome out;
    out.time_limit = options_.time_limit;
    out.max_bound = options_.max_bound;
    try {
      for (std::size_t n = 1; n <= options_.max_bound; ++n) {
        std::size_t depth = options_.max_depth ? std::min(n, *options_.max_depth) : n;
        if (auto d = phase(Phase::Counterexample, n, [&] { return counterexample(depth); })) {
          out.kind = SolveOutcome::Kind::Unsat;
          out.derivation = std::move(*d);
          out.bound = depth;
          return {std::move(out), std::move(log_)};
        }
        if (auto m = phase(Phase::Model, n, [&] { return model(n); })) {
          out.kind = SolveOutcome::Kind::Sat;
          out.automaton = std::move(m->first);
          out.tables = std::move(m->second);
          out.bound = n;
          return {std::move(out), std::move(log_)};
        }
      }
      out.reason = SolveOutcome::UnknownReason::BoundExhausted;
      out.detail = "no model with at most " + plural_states(options_.max_bound) +
                   " per sort and no counterexample up to depth " +
                   std::to_string(options_.max_depth ? std::min(options_.max_bound, *options_.max_depth)
                                                     : options_.max_bound);
    } catch (const BudgetExceeded& e) {
      out.reason = e.reason() == BudgetExceeded::Reason::Time ? SolveOutcome::UnknownReason::Timeout
                                                               : SolveOutcome::UnknownReason::Budget;
      out.detail = e.what();
    }
    out.kind = SolveOutcome::Kind::Unknown;
    return {std::move(out), std::move(log_)};
  }

 private:
  template <typename F>
  auto phase(Phase p, std::size_t n, F&& body) -> decltype(body()) {
    if (observer_) observer_(p, n);
    check_time();
    auto t0 = Clock::now();
    RunEvent ev{p, n, 0, RunEvent::Verdict::Unknown};
    try {
      auto result = body();
      ev.verdict = result ? RunEvent::Verdict::Found : RunEvent::Verdict::None;
      ev.seconds = Seconds(Clock::now() - t0).count();
      log_.events.push_back(ev);
      return result;
    } catch (const BudgetExceeded&) {
      ev.seconds = Seconds(Clock::now() - t0).count();
      log_.events.push_back(ev);
      throw;
    }
  }

  void check_time() const {
    if (deadline_ && Clock::now() > *deadline_)
      throw BudgetExceeded(BudgetExceeded::Reason::Time, "time limit of " + limit_text() + " reached");
  }

  std::string limit_text() const {
    std::ostringstream s;
    s << options_.time_limit << " s";
    return s.str();
  }

  double remaining() const {
    if (!deadline_) return 1e9;
    return std::max(0.0, Seconds(*deadline_ - Clock::now()).count());
  }

  std::optional<Derivation> counterexample(std::size_t depth) {
    // A capped depth repeats; the earlier search already came back empty.
    if (searched_depth_ == depth) return std::nullopt;
    searched_depth_ = depth;
    if (options_.backend == Backend::Asp) {
      SolverRun run = external(emit_counterexample_search(problem_, depth));
      if (run.outcome == SolverOutcome::Unsatisfiable) return std::nullopt;
      // The answer set names the goal instance; the proof comes from the
      // bounded ground model, which must agree.
      Derivation hint = decode_counterexample(*run.answer, problem_);
      auto d = find_counterexample(problem_, depth, options_.atom_cap);
      if (!d) throw std::logic_error("solver reported goal " + std::to_string(hint.goal) +
                                     " violated but the ground model has no instance");
      return d;
    }
    return find_counterexample(problem_, depth, options_.atom_cap);
  }

  std::optional<std::pair<TreeAutomaton, PredicateTables>> model(std::size_t n) {
    std::vector<std::size_t> bounds(sig_->sort_count(), n);
    if (options_.backend == Backend::Asp) {
      SolverRun run = external(emit_model_search(problem_, bounds, options_.symmetry_breaking));
      if (run.outcome == SolverOutcome::Unsatisfiable) return std::nullopt;
      DecodedModel m = decode_model(*run.answer, problem_);
      return std::make_pair(std::move(m.automaton), std::move(m.tables));
    }
    SearchConfig cfg;
    cfg.max_states = bounds;
    cfg.symmetry_breaking = options_.symmetry_breaking;
    cfg.node_budget = options_.node_budget;
    cfg.deadline = deadline_;
    auto m = search_model(program_, cfg);
    if (!m) return std::nullopt;
    return std::make_pair(std::move(m->automaton), std::move(m->tables));
  }

  SolverRun external(const AspProgram& program) {
    SolverConfig cfg = solver_;
    cfg.time_limit = remaining();
    SolverRun run = run_external(program, cfg);
    if (run.outcome == SolverOutcome::Unknown) {
      if (run.timed_out) throw BudgetExceeded(BudgetExceeded::Reason::Time, "time limit of " + limit_text() + " reached");
      throw BudgetExceeded(BudgetExceeded::Reason::Nodes, "ASP solver returned UNKNOWN");
    }
    return run;
  }

  const Problem& problem_;
  const SolveOptions& options_;
  const PhaseObserver& observer_;
  SignaturePtr sig_;
  FlatProgram program_;
  Clock::time_point start_;
  std::optional<Clock::time_point> deadline_;
  SolverConfig solver_;
  RunLog log_;
  std::optional<std::size_t> searched_depth_;
};

}  // namespace

std::pair<SolveOutcome, RunLog> solve(const Problem& problem, const SolveOptions& options,
                                      const PhaseObserver& observer) {
  return Solver(problem, options, observer).run();
}

// ---------------------------------------------------------------------------

Problem gen_member_rev(std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be positive");
  Problem p;
  SortDecl elt{"elt", {}};
  for (std::size_t i = 1; i <= k; ++i) elt.constructors.push_back({"a" + std::to_string(i), {}});
  SortDecl list{"list", {{"nil", {}}, {"cons", {"elt", "list"}}}};
  p.sorts = {elt, list};
  p.predicates = {{"member", {"elt", "list"}},
                  {"notMember", {"elt", "list"}},
                  {"revAcc", {"list", "list", "list"}},
                  {"rev", {"list", "list"}}};

  auto E = [](const char* n) { return Term::var(n, "elt"); };
  auto L = [](const char* n) { return Term::var(n, "list"); };
  auto nil = Term::app("nil");
  auto cons = [](Term h, Term t) { return Term::app("cons", {std::move(h), std::move(t)}); };
  auto atom = [](const char* pred, std::vector<Term> args) { return Atom{pred, std::move(args)}; };
  auto lit = [](const char* pred, std::vector<Term> args) { return Literal::atom(pred, std::move(args)); };
  auto definite = [](std::vector<VarDecl> vars, std::vector<Literal> body, Atom head) {
    return Clause{ClauseKind::Definite, std::move(vars), std::move(head), std::move(body)};
  };
  auto goal = [](std::vector<VarDecl> vars, std::vector<Literal> body) {
    return Clause{ClauseKind::Goal, std::move(vars), std::nullopt, std::move(body)};
  };

  p.clauses = {
      definite({{"x", "elt"}, {"l", "list"}}, {}, atom("member", {E("x"), cons(E("x"), L("l"))})),
      definite({{"x", "elt"}, {"y", "elt"}, {"l", "list"}}, {lit("member", {E("x"), L("l")})},
               atom("member", {E("x"), cons(E("y"), L("l"))})),
      definite({{"x", "elt"}}, {}, atom("notMember", {E("x"), nil})),
      definite({{"x", "elt"}, {"y", "elt"}, {"l", "list"}},
               {Literal::diseq(E("x"), E("y")), lit("notMember", {E("x"), L("l")})},
               atom("notMember", {E("x"), cons(E("y"), L("l"))})),
      definite({{"acc", "list"}}, {}, atom("revAcc", {nil, L("acc"), L("acc")})),
      definite({{"x", "elt"}, {"l", "list"}, {"acc", "list"}, {"r", "list"}},
               {lit("revAcc", {L("l"), cons(E("x"), L("acc")), L("r")})},
               atom("revAcc", {cons(E("x"), L("l")), L("acc"), L("r")})),
      definite({{"l1", "list"}, {"l2", "list"}}, {lit("revAcc", {L("l1"), nil, L("l2")})},
               atom("rev", {L("l1"), L("l2")})),
      goal({{"x", "elt"}, {"l1", "list"}, {"l2", "list"}},
           {lit("member", {E("x"), L("l1")}), lit("rev", {L("l1"), L("l2")}), lit("notMember", {E("x"), L("l2")})}),
      goal({{"x", "elt"}, {"l1", "list"}, {"l2", "list"}},
           {lit("notMember", {E("x"), L("l1")}), lit("rev", {L("l1"), L("l2")}), lit("member", {E("x"), L("l2")})}),
  };
  return p;
}

// ---------------------------------------------------------------------------

std::string phase_line(Phase phase, std::size_t bound) {
  return std::string(phase == Phase::Counterexample ? "Searching for a counterexample with "
                                                    : "Searching for a model with ") +
         plural_states(bound);
}

std::string render_outcome(const SolveOutcome& outcome, const Problem& problem) {
  std::ostringstream out;
  switch (outcome.kind) {
    case SolveOutcome::Kind::Sat:
      out << render_model(*outcome.automaton, *outcome.tables) << "\n";
      out << "Success! Clauses are satisfiable by a Herbrand model recognized by a tree automaton with "
          << plural_states(outcome.automaton->total_states()) << "\n";
      break;
    case SolveOutcome::Kind::Unsat:
      out << "Failure! Clauses are unsatisfiable: counterexample within term depth " << outcome.bound << "\n";
      out << render_derivation(problem, *outcome.derivation);
      break;
    case SolveOutcome::Kind::Unknown:
      out << "Unknown: ";
      switch (outcome.reason) {
        case SolveOutcome::UnknownReason::BoundExhausted:
          out << outcome.detail << " (max bound " << outcome.max_bound << ")";
          break;
        case SolveOutcome::UnknownReason::Timeout:
          out << "time limit of " << outcome.time_limit << " s reached";
          break;
        case SolveOutcome::UnknownReason::Budget:
          out << "budget exhausted: " << outcome.detail;
          break;
      }
      out << "\n";
      break;
  }
  return out.str();
}

namespace {

nlohmann::json term_json(const Term& t) { return t.to_string(); }

nlohmann::json proof_json(const ProofTree& node) {
  nlohmann::json j;
  j["atom"] = node.atom.to_string();
  j["clause"] = node.clause;
  nlohmann::json premises = nlohmann::json::array();
  for (const auto& p : node.premises) premises.push_back(proof_json(p));
  j["premises"] = premises;
  return j;
}

const char* phase_name(Phase p) { return p == Phase::Counterexample ? "counterexample" : "model"; }

const char* verdict_name(RunEvent::Verdict v) {
  switch (v) {
    case RunEvent::Verdict::Found:
      return "found";
    case RunEvent::Verdict::None:
      return "none";
    case RunEvent::Verdict::Unknown:
      break;
  }
  return "unknown";
}

}  // namespace

std::string outcome_json(const SolveOutcome& outcome, const RunLog& log, const Problem& problem) {
  nlohmann::ordered_json j;
  switch (outcome.kind) {
    case SolveOutcome::Kind::Sat: {
      const auto& a = *outcome.automaton;
      const auto& sig = a.signature();
      j["result"] = "sat";
      j["bound"] = outcome.bound;
      j["total_states"] = a.total_states();
      nlohmann::ordered_json states;
      for (std::size_t s = 0; s < sig.sort_count(); ++s) states[sig.sort_name(s)] = a.state_count(s);
      j["states"] = states;
      j["transitions"] = transition_lines(a);
      nlohmann::ordered_json tables;
      for (std::size_t p = 0; p < sig.predicates().size(); ++p) tables[sig.predicate(p).name] = outcome.tables->sorted_tuples(p);
      j["tables"] = tables;
      j["text"] = render_outcome(outcome, problem);
      break;
    }
    case SolveOutcome::Kind::Unsat: {
      const auto& d = *outcome.derivation;
      j["result"] = "unsat";
      j["depth"] = outcome.bound;
      j["goal"] = d.goal;
      nlohmann::ordered_json subst;
      for (const auto& [v, t] : d.subst) subst[v] = term_json(t);
      j["substitution"] = subst;
      nlohmann::json proofs = nlohmann::json::array();
      for (const auto& p : d.proofs) proofs.push_back(proof_json(p));
      j["proofs"] = proofs;
      j["text"] = render_outcome(outcome, problem);
      break;
    }
    case SolveOutcome::Kind::Unknown:
      j["result"] = "unknown";
      j["reason"] = outcome.reason == SolveOutcome::UnknownReason::Timeout  ? "timeout"
                    : outcome.reason == SolveOutcome::UnknownReason::Budget ? "budget"
                                                                            : "bound";
      j["time_limit"] = outcome.time_limit;
      j["max_bound"] = outcome.max_bound;
      j["detail"] = outcome.detail;
      j["text"] = render_outcome(outcome, problem);
      break;
  }
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : log.events)
    events.push_back({{"phase", phase_name(e.phase)}, {"bound", e.bound}, {"seconds", e.seconds},
                      {"verdict", verdict_name(e.verdict)}});
  j["log"] = events;
  return j.dump(2);
}

ModelCount count_models_at(const Problem& problem, std::size_t n, bool symmetry_breaking,
                           const SolverConfig& config) {
  Signature sig(problem);
  AspProgram prog = emit_model_search(problem, std::vector<std::size_t>(sig.sort_count(), n), symmetry_breaking);
  return count_models(prog, config);
}

std::vector<std::string> emit_programs(const Problem& problem, const SolveOptions& options, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  Signature sig(problem);
  std::vector<std::string> written;
  auto write = [&](const std::string& name, const std::string& text) {
    fs::path path = fs::path(dir) / name;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    written.push_back(path.string());
  };
  for (std::size_t n = 1; n <= options.max_bound; ++n) {
    std::size_t depth = options.max_depth ? std::min(n, *options.max_depth) : n;
    write("counterexample_" + std::to_string(n) + ".lp", emit_counterexample_search(problem, depth).text);
    write("model_" + std::to_string(n) + ".lp",
          emit_model_search(problem, std::vector<std::size_t>(sig.sort_count(), n), options.symmetry_breaking).text);
  }
  return written;
}

}  // namespace regmod
