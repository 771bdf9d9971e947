#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "multiexec/model.hpp"
#include "multiexec/ode.hpp"

namespace multiexec {

/// Time grid on [t_start, t_end] whose step sizes shrink geometrically
/// toward t_end: the first step is `refinement` times the last one.
struct GridSpec {
  double t_start = 0.0;
  double t_end = 1.0;
  int base_steps = 2000;
  double refinement = 8.0;
};

GridSpec default_grid(const ModelParams& params);

/// Strictly increasing points, first t_start, last t_end, base_steps + 1 of them.
std::vector<double> make_grid(const GridSpec& spec);

/// Merges extra times into a sorted grid, dropping duplicates and anything
/// outside [grid.front(), grid.back()].
std::vector<double> merge_nodes(std::vector<double> grid, const std::vector<double>& extra);

/// Frozen coefficients of the transformed Riccati equation on one schedule piece:
///   dQ/dt = Q R Q - Q S - S Q - Gamma,
/// R = [-I; gamma] Lambda^{-1} [-I, gamma], S = diag(0, -rho),
/// Gamma = diag(Sigma, gamma^{-1} rho + rho gamma^{-1}).
struct RiccatiCoefficients {
  MatrixXd r;
  MatrixXd s;
  MatrixXd source;
};

RiccatiCoefficients riccati_coefficients(const ModelParams& params, double t);
MatrixXd riccati_rhs(const MatrixXd& q, const RiccatiCoefficients& coef);

/// dQ/dt of the transformed equation at time t (forward-time form).
BlockSym rhs(double t, const BlockSym& q, const ModelParams& params);

/// Q(T) = [[n I, I], [I, gamma^{-1}]]; requires n >= gamma_max.
BlockSym terminal_condition(double n, const ModelParams& params);

struct SolverOptions {
  OdeOptions ode{.rtol = 1e-10, .atol = 1e-12};
  /// Relative PSD tolerance: min eigenvalue >= -psd_tol * (1 + |Q|).
  double psd_tol = 1e-8;
  /// Relative monotonicity tolerance used by the penalization ladder.
  double monotonicity_tol = 1e-7;
};

struct RiccatiDiagnostics {
  double max_symmetry_defect = 0.0;
  double min_eigenvalue = 0.0;  // raw smallest eigenvalue over stored points
  double min_eigenvalue_time = 0.0;
  double min_relative_eigenvalue = 0.0;  // min over points of lambda_min / (1 + |Q|)
  std::size_t steps = 0;
  std::size_t rejected = 0;

  // Populated for ladder (limit) solutions only.
  std::vector<double> ladder;
  std::vector<double> convergence_history;  // sup relative change between rungs
  bool converged = false;
  double monotonicity_margin = 0.0;  // min relative eigenvalue of Q^{k+1} - Q^k
};

/// Solution of the transformed Riccati equation for one penalization level,
/// or the limit approximation produced by a penalization ladder.
///
/// Stores every accepted integrator step; `nodes()` are the requested grid
/// points, all of which are stored exactly.
class RiccatiSolution {
 public:
  RiccatiSolution(ModelParams params, double n, bool limit, std::vector<double> grid,
                  std::vector<MatrixXd> values, std::vector<double> nodes,
                  RiccatiDiagnostics diagnostics);

  const ModelParams& params() const { return params_; }
  double n() const { return n_; }
  bool is_limit() const { return limit_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& nodes() const { return nodes_; }
  std::size_t size() const { return grid_.size(); }
  double t_begin() const { return grid_.front(); }
  double t_end() const { return grid_.back(); }
  const RiccatiDiagnostics& diagnostics() const { return diagnostics_; }
  RiccatiDiagnostics& diagnostics() { return diagnostics_; }

  BlockSym value(std::size_t k) const { return BlockSym::from_full(values_[k]); }
  const MatrixXd& full(std::size_t k) const { return values_[k]; }

  /// Cubic Hermite interpolation using the equation's own slopes; exact at
  /// stored points. Throws PreconditionError outside [t_begin, t_end].
  BlockSym eval(double t) const { return BlockSym::from_full(eval_full(t)); }
  MatrixXd eval_full(double t) const;

  /// Copy limited to [t_begin, t_max]; t_max must lie inside the range.
  RiccatiSolution restricted(double t_max) const;

 private:
  void compute_slopes();

  ModelParams params_;
  double n_;
  bool limit_;
  std::vector<double> grid_;
  std::vector<MatrixXd> values_;
  std::vector<double> nodes_;
  // dQ/dt at both ends of every stored interval, with that interval's coefficients.
  std::vector<MatrixXd> slope_lo_;
  std::vector<MatrixXd> slope_hi_;
  RiccatiDiagnostics diagnostics_;
};

inline BlockSym eval(const RiccatiSolution& solution, double t) { return solution.eval(t); }

/// Backward integration from terminal_condition(n) on the grid nodes (schedule
/// breakpoints are inserted). Requires n >= gamma_max and grid.t_end == T.
RiccatiSolution solve_penalized(const ModelParams& params, double n, const GridSpec& grid,
                                const SolverOptions& options = {});
RiccatiSolution solve_penalized(const ModelParams& params, double n, std::vector<double> nodes,
                                const SolverOptions& options = {});

/// n_k = n0 * 2^k for k = 1..rungs.
std::vector<double> default_ladder(double n0, int rungs = 12);

struct LadderResult {
  RiccatiSolution limit;  // chosen rung restricted to [t_start, t_max], flagged limit
  RiccatiSolution top;    // chosen rung on the full grid
  std::vector<RiccatiSolution> rungs;  // every solved rung (full grid), in ladder order
};

/// Solves the ladder until the sup over nodes t <= t_max of
/// |Q^{n_k}(t) - Q^{n_{k-1}}(t)| / (1 + |Q^{n_k}(t)|) drops below tol.
/// If the ladder is exhausted the last rung is returned with converged = false.
/// Throws NumericError if PSD monotonicity in n fails beyond tolerance.
LadderResult solve_ladder(const ModelParams& params, double t_max, const std::vector<double>& ladder,
                          double tol, const GridSpec& grid, const SolverOptions& options = {},
                          bool keep_rungs = false);

RiccatiSolution solve_limit(const ModelParams& params, double t_max, const std::vector<double>& ladder,
                            double tol, const GridSpec& grid, const SolverOptions& options = {});

/// Column header: t, A_11, A_12, ..., B_.., C_dd (upper triangle of Q, row-major).
std::vector<std::string> solution_columns(int d);

/// Writes one row per node of the solution, 12 significant digits.
void write_solution_csv(const RiccatiSolution& solution, std::ostream& out);

/// Plain table read back from a solution file.
struct SolutionTable {
  int d = 0;
  std::vector<double> t;
  std::vector<BlockSym> values;
};

/// Parses a solution file; throws ConfigError on header, shape, ordering or
/// non-finite problems.
SolutionTable read_solution_csv(std::istream& in, int d);

}  // namespace multiexec
