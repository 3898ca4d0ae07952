#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "regmod/driver.hpp"
#include "regmod/frontend.hpp"

namespace {

constexpr int kExitSat = 0;
constexpr int kExitUnsat = 1;
constexpr int kExitUnknown = 2;
constexpr int kExitUsage = 64;
constexpr int kExitInput = 65;

struct SolveArgs {
  std::string file;
  std::string backend = "native";
  std::string solver_path;
  std::size_t max_states = 6;
  std::size_t max_depth = 0;
  double timeout = 0;
  bool no_sb = false;
  std::string emit_dir;
  bool count = false;
  bool json = false;
};

int run_solve(const SolveArgs& args) {
  std::ifstream in(args.file);
  if (!in) {
    std::cerr << "error: cannot read " << args.file << "\n";
    return kExitInput;
  }
  std::stringstream text;
  text << in.rdbuf();

  regmod::Problem problem;
  std::vector<std::string> warnings;
  try {
    problem = regmod::parse_problem(text.str(), &warnings);
  } catch (const regmod::ParseError& e) {
    std::cerr << args.file << ":" << e.what() << "\n";
    return kExitInput;
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

  regmod::SolveOptions opts;
  opts.backend = args.backend == "asp" ? regmod::Backend::Asp : regmod::Backend::Native;
  opts.max_bound = args.max_states;
  if (args.max_depth) opts.max_depth = args.max_depth;
  opts.time_limit = args.timeout;
  opts.symmetry_breaking = !args.no_sb;
  opts.solver_path = args.solver_path;

  if (!args.emit_dir.empty()) {
    for (const auto& path : regmod::emit_programs(problem, opts, args.emit_dir)) std::cout << path << "\n";
    return kExitSat;
  }

  auto observer = [&](regmod::Phase phase, std::size_t bound) {
    if (!args.json) std::cout << regmod::phase_line(phase, bound) << std::endl;
  };

  std::pair<regmod::SolveOutcome, regmod::RunLog> result;
  try {
    result = regmod::solve(problem, opts, observer);
  } catch (const regmod::AspError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == regmod::AspError::Kind::SolverNotFound ? kExitUsage : kExitUnknown;
  }
  const auto& [outcome, log] = result;
  if (args.json)
    std::cout << regmod::outcome_json(outcome, log, problem) << "\n";
  else
    std::cout << regmod::render_outcome(outcome, problem);

  if (args.count && outcome.kind == regmod::SolveOutcome::Kind::Sat && opts.backend == regmod::Backend::Asp) {
    regmod::SolverConfig cfg;
    cfg.solver_path = args.solver_path.empty() ? regmod::find_solver().value_or("") : args.solver_path;
    cfg.time_limit = args.timeout > 0 ? args.timeout : 600;
    auto mc = regmod::count_models_at(problem, outcome.bound, opts.symmetry_breaking, cfg);
    (args.json ? std::cerr : std::cout) << "Models with " << outcome.bound << " states per sort"
                                        << (opts.symmetry_breaking ? " (symmetry breaking)" : "") << ": "
                                        << mc.count << (mc.exhaustive ? "" : "+") << "\n";
  }

  switch (outcome.kind) {
    case regmod::SolveOutcome::Kind::Sat:
      return kExitSat;
    case regmod::SolveOutcome::Kind::Unsat:
      return kExitUnsat;
    case regmod::SolveOutcome::Kind::Unknown:
      break;
  }
  return kExitUnknown;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regular Herbrand models for Horn clauses over algebraic data types"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* cmd = app.add_subcommand("solve", "decide satisfiability of a problem file");
  cmd->add_option("FILE", solve.file, "problem in the SMT-LIB subset")->required();
  cmd->add_option("--backend", solve.backend, "native or asp")->check(CLI::IsMember({"native", "asp"}));
  cmd->add_option("--solver-path", solve.solver_path, "ASP solver executable");
  cmd->add_option("--max-states", solve.max_states, "largest state bound per sort")->check(CLI::PositiveNumber);
  cmd->add_option("--max-depth", solve.max_depth, "cap on the counterexample term depth")->check(CLI::PositiveNumber);
  cmd->add_option("--timeout", solve.timeout, "wall-clock limit in seconds")->check(CLI::NonNegativeNumber);
  cmd->add_flag("--no-symmetry-breaking", solve.no_sb, "search all automata");
  cmd->add_option("--emit-asp", solve.emit_dir, "write the ASP programs for every bound to DIR and stop");
  cmd->add_flag("--count-models", solve.count, "with --backend asp: count models at the solving bound");
  cmd->add_flag("--json", solve.json, "machine-readable output");

  std::size_t k = 0;
  std::string out_file;
  auto* gen = app.add_subcommand("gen", "generate benchmark problems");
  gen->require_subcommand(1);
  auto* mr = gen->add_subcommand("member-rev", "member/notMember/rev over k elements");
  mr->add_option("K", k, "number of elements")->required()->check(CLI::PositiveNumber);
  mr->add_option("-o,--output", out_file, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (*cmd) return run_solve(solve);

  std::string text = regmod::print_problem(regmod::gen_member_rev(k));
  if (out_file.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_file);
    if (!out) {
      std::cerr << "error: cannot write " << out_file << "\n";
      return kExitInput;
    }
    out << text;
  }
  return 0;
}
