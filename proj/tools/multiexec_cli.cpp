// Command-line front end: solve, simulate, sweep, verify, figures.
//
// Exit status: 0 success, 1 numeric failure or failed check, 2 bad input.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "multiexec/bounds.hpp"
#include "multiexec/experiment.hpp"
#include "multiexec/io.hpp"

namespace {

using namespace multiexec;

constexpr int kOk = 0;
constexpr int kNumeric = 1;
constexpr int kInput = 2;

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  for (const auto& cell : split_csv_line(text)) {
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (cell.empty() || *end != '\0') throw ConfigError(std::string("bad number in ") + what + ": '" + cell + "'");
    out.push_back(v);
  }
  return out;
}

VectorXd parse_state(const std::string& text, int d, double fill, const char* what) {
  if (text.empty()) return VectorXd::Constant(d, fill);
  const auto v = parse_list(text, what);
  if (static_cast<int>(v.size()) != d) throw ConfigError(std::string(what) + " needs " + std::to_string(d) + " entries");
  return Eigen::Map<const VectorXd>(v.data(), d);
}

struct Common {
  std::string config;
  std::string out = "out";
  int steps = 2000;
  double refinement = 8.0;
};

GridSpec grid_for(const ModelParams& p, const Common& c) { return GridSpec{0.0, p.horizon, c.steps, c.refinement}; }

void add_grid(CLI::App* cmd, Common& c) {
  cmd->add_option("--steps", c.steps, "Base grid steps")->check(CLI::PositiveNumber);
  cmd->add_option("--refinement", c.refinement, "Ratio of first to last grid step")->check(CLI::Range(1.0, 1e6));
  cmd->add_option("--out", c.out, "Output directory");
}

int report_families(const std::vector<FamilyResult>& results) {
  bool all = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.family << "  " << r.detail << "\n";
    all = all && r.pass;
  }
  return all ? kOk : kNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-asset optimal liquidation: Riccati solver, bounds and simulation"};
  app.require_subcommand(1);

  Common common;
  double n = 0.0;
  std::string x0_text, y0_text, ladder_text, values_text, variable = "k", solution_file;
  int rungs = 0;  // 0 keeps the library default of each subcommand
  double delta = 0.05, tol = 1e-4;
  std::uint64_t seed = 1;

  auto* solve = app.add_subcommand("solve", "Solve the Riccati equation at one penalty level");
  solve->add_option("--config", common.config, "Model config (JSON)")->required();
  solve->add_option("--n", n, "Penalty level (> n0)")->required();
  add_grid(solve, common);

  auto* sim = app.add_subcommand("simulate", "Solve and simulate the optimal closed loop");
  sim->add_option("--config", common.config, "Model config (JSON)")->required();
  sim->add_option("--n", n, "Penalty level (> n0)")->required();
  sim->add_option("--x0", x0_text, "Initial position, comma separated (default all ones)");
  sim->add_option("--y0", y0_text, "Initial price deviation (default zeros)");
  add_grid(sim, common);

  auto* sweep = app.add_subcommand("sweep", "Parameter sweep with one trajectory per value");
  sweep->add_option("--config", common.config, "Base model config (JSON)")->required();
  sweep->add_option("--var", variable, "Sweep variable: k, lambda1, gamma1, rho1, gamma");
  sweep->add_option("--values", values_text, "Sweep values, comma separated")->required();
  sweep->add_option("--x0", x0_text, "Initial position (default all ones)");
  sweep->add_option("--y0", y0_text, "Initial price deviation (default zeros)");
  sweep->add_option("--ladder", ladder_text, "Penalty levels, comma separated (default n0 * 2^k)");
  sweep->add_option("--rungs", rungs, "Rungs of the default ladder")->check(CLI::PositiveNumber);
  sweep->add_option("--tol", tol, "Ladder convergence tolerance");
  sweep->add_option("--delta", delta, "Report X at T - delta")->check(CLI::PositiveNumber);
  add_grid(sweep, common);

  auto* verify = app.add_subcommand("verify", "Run every invariant family on one config");
  verify->add_option("--config", common.config, "Model config (JSON)")->required();
  verify->add_option("--ladder", ladder_text, "Penalty levels, comma separated (default n0 * 2^k)");
  verify->add_option("--rungs", rungs, "Rungs of the default ladder")->check(CLI::PositiveNumber);
  verify->add_option("--seed", seed, "Seed of the comparison campaign");
  verify->add_option("--solution", solution_file, "Solution file to check against its checksum");
  add_grid(verify, common);

  auto* figures = app.add_subcommand("figures", "Run the five built-in figure sweeps");
  figures->add_option("--ladder", ladder_text, "Penalty levels, comma separated (default n0 * 2^k)");
  figures->add_option("--rungs", rungs, "Rungs of the default ladder")->check(CLI::PositiveNumber);
  figures->add_option("--delta", delta, "Report X at T - delta")->check(CLI::PositiveNumber);
  add_grid(figures, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInput;
  }

  try {
    if (*solve) {
      const ModelParams p = load_params(common.config);
      const SolveOutcome out = run_solve(p, n, grid_for(p, common), common.out);
      std::cout << "n0 = " << format_number(out.n0) << ", T0 = " << format_number(out.t0) << "\n"
                << "wrote " << out.solution_file << " and " << out.summary_file << "\n";
      return kOk;
    }
    if (*sim) {
      const ModelParams p = load_params(common.config);
      const double c = run_simulate(p, n, grid_for(p, common), parse_state(x0_text, p.d, 1.0, "--x0"),
                                    parse_state(y0_text, p.d, 0.0, "--y0"), common.out);
      std::cout << "penalized cost " << format_number(c) << "\n";
      return kOk;
    }
    if (*sweep) {
      ExperimentSpec spec;
      spec.name = "sweep";
      spec.base = load_params(common.config);
      spec.variable = parse_sweep_variable(variable);
      spec.values = parse_list(values_text, "--values");
      spec.x0 = parse_state(x0_text, spec.base.d, 1.0, "--x0");
      spec.y0 = parse_state(y0_text, spec.base.d, 0.0, "--y0");
      spec.delta = delta;
      spec.ladder.levels = ladder_text.empty() ? std::vector<double>{} : parse_list(ladder_text, "--ladder");
      if (rungs > 0) spec.ladder.rungs = rungs;
      spec.ladder.tol = tol;
      spec.base_steps = common.steps;
      spec.refinement = common.refinement;
      spec.out_dir = common.out;
      bool ok = true;
      for (const auto& row : run_sweep(spec)) {
        std::cout << to_string(spec.variable) << " = " << format_number(row.value) << ": "
                  << (row.ok ? "V = " + format_number(row.v0) : "failed: " + row.error) << "\n";
        ok = ok && row.ok;
      }
      return ok ? kOk : kNumeric;
    }
    if (*verify) {
      const ModelParams p = load_params(common.config);
      VerifyOptions opts;
      opts.ladder = ladder_text.empty() ? std::vector<double>{} : parse_list(ladder_text, "--ladder");
      if (rungs > 0) opts.rungs = rungs;
      opts.grid = grid_for(p, common);
      opts.seed = seed;
      if (!solution_file.empty()) {
        // Integrity problems of an input file are input errors, reported before any solving.
        load_checked_solution(solution_file, p.d);
        opts.solution_file = solution_file;
      }
      return report_families(run_verify(p, opts, common.out));
    }
    if (*figures) {
      bool ok = true;
      for (auto spec : figure_specs(common.out)) {
        spec.delta = delta;
        spec.ladder.levels = ladder_text.empty() ? std::vector<double>{} : parse_list(ladder_text, "--ladder");
        if (rungs > 0) spec.ladder.rungs = rungs;
        spec.base_steps = common.steps;
        spec.refinement = common.refinement;
        for (const auto& row : run_sweep(spec)) {
          std::cout << spec.name << " " << to_string(spec.variable) << " = " << format_number(row.value) << ": "
                    << (row.ok ? "V = " + format_number(row.v0) : "failed: " + row.error) << "\n";
          ok = ok && row.ok;
        }
      }
      return ok ? kOk : kNumeric;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kInput;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition error: " << e.what() << "\n";
    return kInput;
  } catch (const NumericError& e) {
    std::cerr << "numeric error at t = " << e.time() << ": " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumeric;
  }
  return kOk;
}
