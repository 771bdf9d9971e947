#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "multiexec/model.hpp"
#include "multiexec/riccati.hpp"

namespace multiexec {

enum class SweepVariable { k, lambda1, gamma1, rho1, gamma };

std::string to_string(SweepVariable v);
SweepVariable parse_sweep_variable(const std::string& name);

/// Penalization levels: an explicit list, or n0 * 2^k for k = 1..rungs.
struct LadderSpec {
  std::vector<double> levels;
  int rungs = 20;
  double tol = 1e-4;

  std::vector<double> resolve(const ModelParams& params) const;
};

/// One parameter sweep: a base configuration, the field to vary and its values.
/// Sweeping k sets Sigma = [[s1^2, k s1 s2], [k s1 s2, s2^2]] with s_i the
/// square roots of the base diagonal.
struct ExperimentSpec {
  std::string name;
  ModelParams base;
  SweepVariable variable = SweepVariable::k;
  std::vector<double> values;
  VectorXd x0;
  VectorXd y0;
  double t0 = 0.0;
  double delta = 0.05;
  LadderSpec ladder;
  int base_steps = 2000;
  double refinement = 8.0;
  std::string out_dir;
};

ModelParams apply_sweep(const ExperimentSpec& spec, double value);

/// The five two-asset and single-asset figure configurations.
std::vector<ExperimentSpec> figure_specs(const std::string& out_root);

struct SweepRow {
  double value = 0.0;
  bool ok = false;
  std::string error;
  double n = 0.0;          // ladder level used for the trajectory
  bool converged = false;  // ladder met its tolerance on [t0, T - delta]
  double v0 = 0.0;         // value at (t0, x0, y0)
  VectorXd xi0;
  VectorXd x_end;          // X(T - delta)
  std::string trajectory_file;
};

/// Solves and simulates every sweep value in a worker pool, writes one
/// trajectory file per value and summary.csv / summary.json sorted by value.
std::vector<SweepRow> run_sweep(const ExperimentSpec& spec, unsigned workers = 0);

/// Writes solution.csv, its checksum sidecar and summary.json into out_dir.
/// Throws PreconditionError unless n > n0.
struct SolveOutcome {
  std::string solution_file;
  std::string summary_file;
  double n0 = 0.0;
  double t0 = 0.0;
};

SolveOutcome run_solve(const ModelParams& params, double n, const GridSpec& grid, const std::string& out_dir);

/// Solves at level n and simulates from (x0, y0) at t = 0; writes
/// trajectory.csv and summary.json. Returns the penalized cost.
double run_simulate(const ModelParams& params, double n, const GridSpec& grid, const VectorXd& x0,
                    const VectorXd& y0, const std::string& out_dir);

/// Reads a solution file and checks it against its checksum sidecar.
/// Throws ConfigError on a missing or mismatched checksum or a malformed table.
SolutionTable load_checked_solution(const std::string& path, int d);

struct FamilyResult {
  std::string family;
  bool pass = false;
  std::string detail;
};

struct VerifyOptions {
  std::vector<double> ladder;  // empty: default ladder from n0
  int rungs = 12;
  GridSpec grid;
  std::uint64_t seed = 1;
  int comparison_pairs = 100;
  std::optional<std::string> solution_file;
};

/// Every invariant family on one configuration; writes verify.json into out_dir.
std::vector<FamilyResult> run_verify(const ModelParams& params, const VerifyOptions& options,
                                     const std::string& out_dir);

}  // namespace multiexec
