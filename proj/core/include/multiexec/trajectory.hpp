#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "multiexec/model.hpp"
#include "multiexec/ode.hpp"
#include "multiexec/riccati.hpp"

namespace multiexec {

/// xi = -Lambda^{-1} [-I, gamma] Q [x; y] = Lambda^{-1} (D x - E y).
VectorXd feedback(const BlockSym& q, const VectorXd& x, const VectorXd& y, const ModelParams& params);

/// [x^T y^T] P [x; y].
double value(const BlockSym& p, const VectorXd& x, const VectorXd& y);

/// Value of the penalized problem at time t from a Riccati solution.
double value_at(const RiccatiSolution& solution, double t, const VectorXd& x, const VectorXd& y);

/// Closed-loop paths sampled on a grid.
struct Trajectory {
  int d = 0;
  std::vector<double> t;
  std::vector<VectorXd> x;
  std::vector<VectorXd> y;
  std::vector<VectorXd> xi;
  /// int_{t0}^{t} (xi^T Lambda xi / 2 + Y^T xi + X^T Sigma X / 2) ds.
  std::vector<double> running_cost;
};

inline const OdeOptions kTrajectoryOde{.rtol = 1e-11, .atol = 1e-14};

/// Forward integration of X' = -xi, Y' = -rho Y + gamma xi under the feedback
/// of `solution`, from (x0, y0) at grid.front(). Integration is split at every
/// stored point of the solution; values are recorded at the grid points.
Trajectory simulate(const RiccatiSolution& solution, const VectorXd& x0, const VectorXd& y0,
                    const std::vector<double>& grid, const OdeOptions& options = kTrajectoryOde);

/// Same, on the solution's stored points from t0 to its end (or to t_end).
Trajectory simulate(const RiccatiSolution& solution, double t0, const VectorXd& x0, const VectorXd& y0,
                    std::optional<double> t_end = std::nullopt, const OdeOptions& options = kTrajectoryOde);

/// Smooth compactly supported perturbation amplitude * direction * psi((t - centre) / width),
/// psi(u) = exp(1 - 1 / (1 - u^2)) on |u| < 1.
struct Bump {
  VectorXd direction;
  double centre = 0.0;
  double width = 0.0;
  double amplitude = 0.0;

  VectorXd at(double t) const;
};

/// Open-loop perturbation: trades xi*(s) + bump(s), where xi*(s) is the
/// optimal rate of the unperturbed closed loop started at the same point.
Trajectory simulate_perturbed(const RiccatiSolution& solution, const VectorXd& x0, const VectorXd& y0,
                              const std::vector<double>& grid, const Bump& bump,
                              const OdeOptions& options = kTrajectoryOde);

/// 2 * running cost at the last point, plus n |X(T)|^2 + 2 Y(T)^T X(T) when a
/// penalty level is given. This is the objective whose optimal value is
/// [x^T y^T] P^n [x; y].
double cost(const Trajectory& traj, std::optional<double> penalty_n = std::nullopt);

/// Fundamental matrix Phi(t0, s) of Phi' = -Lambda^{-1} F(s) Phi and its inverse,
/// Psi' = Psi Lambda^{-1} F(s), both identity at t0.
struct FundamentalPath {
  std::vector<double> t;
  std::vector<MatrixXd> phi;
  std::vector<MatrixXd> phi_inv;
};

FundamentalPath fundamental(const RiccatiSolution& solution, const std::vector<double>& grid,
                            const OdeOptions& options = kTrajectoryOde);

/// Constrained cost of a limit trajectory: running part on [t0, T - delta]
/// plus the finite-n value at T - delta as the tail. Labelled tail-estimated.
struct ConstrainedCost {
  double running;
  double tail;
  double total;
  std::string label;
};

ConstrainedCost constrained_cost(const Trajectory& limit_traj, const RiccatiSolution& top_rung);

/// Liquidation diagnostics over a ladder of penalized solutions.
struct LiquidationReport {
  std::vector<double> n;
  std::vector<double> penalty;  // n |X(T)|^2
  std::vector<double> cross;    // Y(T)^T X(T)
  bool penalty_decreasing = true;
  bool cross_decreasing = true;  // |Y(T)^T X(T)| strictly decreasing
  double threshold = 0.0;
  bool pass = true;
};

LiquidationReport check_liquidation(const std::vector<RiccatiSolution>& ladder, double t0, const VectorXd& x0,
                                    const VectorXd& y0, double threshold);

/// Residuals of the path identities, measured by end-corrected trapezoidal
/// quadrature on the trajectory grid (fourth order):
///   x_state:  X(s) - X(t0) + int xi
///   y_state:  Y(s) - Y(t0) - int (-rho Y + gamma xi)
///   y_identity: Y + gamma X - e^{-R} int e^{R} gamma rho X - e^{-R}(y0 + gamma x0)
///   strategy: xi - Lambda^{-1}[F X - E e^{-R}(y0 + gamma x0) - E e^{-R} int e^{R} gamma rho X]
/// with R(s) = int_{t0}^s rho. Each is the max over the grid of |residual| / (1 + scale).
struct IdentityResiduals {
  double x_state;
  double y_state;
  double y_identity;
  double strategy;
};

IdentityResiduals check_identities(const Trajectory& traj, const RiccatiSolution& solution);

/// Columns t, X_1..X_d, Y_1..Y_d, xi_1..xi_d, running_cost.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

}  // namespace multiexec
