#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "multiexec/model.hpp"
#include "multiexec/ode.hpp"
#include "multiexec/riccati.hpp"

namespace multiexec {

/// alpha = (|Sigma|_inf + 2 gamma_max |rho|_inf) / lambda_min.
double alpha(const ModelParams& params);
/// beta = 3 + 2 |rho|_inf^2.
double beta(const ModelParams& params);
/// n0 = max{lambda_min (sqrt(1 + alpha) + 1) + gamma_min, (beta + 1) gamma_max + 1}.
double n0(const ModelParams& params);
/// Start of the terminal layer on which the weighted-F bounds hold; uses
/// n0_val in place of n0. Requires n0_val >= n0(params). Always < T.
double t0(const ModelParams& params, double n0_val);
inline double t0(const ModelParams& params) { return t0(params, n0(params)); }

/// 0.5 log((z + 1) / (z - 1)); throws PreconditionError unless z > 1.
double arccoth(double z);

/// Solution (A, B, C) of the scalar three-component system for one asset.
struct ScalarTriple {
  std::vector<double> t;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> c;
};

/// Backward integration of
///   dA/dt = -sigma + (A - gamma B)^2 / lambda
///   dB/dt = rho B - (gamma C - B)(A - gamma B) / lambda
///   dC/dt = 2 rho C - 2 rho / gamma + (gamma C - B)^2 / lambda
/// from (n, 1, 1/gamma) at grid.back(). Schedule breakpoints inside the grid
/// are added to the output times. Requires n > gamma.
ScalarTriple scalar_triple_solve(double lambda, double gamma, const ScalarSchedule& sigma_bar,
                                 const ScalarSchedule& rho, double n, const std::vector<double>& grid,
                                 const OdeOptions& options = {.rtol = 1e-11, .atol = 1e-13});

/// Closed-form bounds on the scalar system at time to maturity tau = T - t.
struct ScalarBounds {
  double d_lo;
  double d_hi;
  double b_lo;
  double c_lo;
  double c_hi;
  double f_lo;  // also the lower bound of A
  double f_hi;  // also the upper bound of A
};

ScalarBounds scalar_priori_bounds(double lambda, double gamma, double rho_inf, double sigma_inf,
                                  double n, double tau);

/// Upper D bound lambda k coth(k tau + arccoth((n - gamma) / (lambda k))) with
/// the tanh branch when the arccoth argument is below 1, and the k -> 0 limit.
double d_upper(double lambda, double gamma, double kappa, double n, double tau);
/// gamma / (e^{gamma tau / lambda} (1 + gamma / (n - gamma)) - 1).
double d_lower(double lambda, double gamma, double n, double tau);

/// Diagonal envelope of A, C and F at one time, per asset.
struct EnvelopePoint {
  double t;
  VectorXd a_lo, a_hi;
  VectorXd c_lo, c_hi;
  VectorXd f_lo, f_hi;
};

/// kappa_i = sqrt(2 max{|Sigma|_inf, gamma_i |rho_i|_inf} / lambda_max).
VectorXd envelope_kappa(const ModelParams& params);

/// Per-asset diagonal bounds from the two decoupled parameterizations
/// (lambda_min, gamma_i, 0, rho_i) and (lambda_max, gamma_i, |Sigma|, rho_i).
/// The upper A and F bounds are the n-dependent ones, finite at T.
EnvelopePoint envelope_at(const ModelParams& params, double n, double t);
std::vector<EnvelopePoint> envelope(const ModelParams& params, double n, const std::vector<double>& grid);

/// lambda_max kappa_i coth(kappa_i (T - t)) + gamma_i; infinite at t = T.
VectorXd f_upper_nfree(const ModelParams& params, double t);

/// Decoupled bracketing solutions Q_min <= Q^n <= Q_max, block-diagonal per asset.
struct DecoupledBounds {
  std::vector<double> t;
  std::vector<BlockSym> lower;
  std::vector<BlockSym> upper;
};

DecoupledBounds decoupled_bounds(const ModelParams& params, double n, const std::vector<double>& grid);

/// Scalar bounds q^n(t) I <= Lambda^{-1/2} F^n Lambda^{-1/2} <= p^n(t) I.
/// On [T0, T] these are the coth solutions; on [0, T0) the extension constants.
struct PQ {
  double q;
  double p;
};

PQ pq_bounds(const ModelParams& params, double n, double t);

/// Extension constants used on [0, T0).
PQ pq_extension(const ModelParams& params);

/// Per-time verdicts of one bound family. margin(t) is the smallest eigenvalue
/// over all inequalities checked at t; pass iff every margin >= -tolerance.
struct BoundReport {
  std::string bound;
  std::vector<double> t;
  std::vector<double> margin;
  double tolerance = 0.0;
  bool pass = true;
  double worst_t = 0.0;
  double worst_margin = 0.0;
};

BoundReport make_report(std::string bound, std::vector<double> t, std::vector<double> margin,
                        double tolerance);

/// Diagonal envelope of A, C, F at every stored point of the solution.
BoundReport check_envelope(const RiccatiSolution& solution, double tol);
/// Q_min <= Q <= Q_max at every stored point of the solution.
BoundReport check_decoupled(const RiccatiSolution& solution, double tol);
/// Weighted-F sandwich on [T0, T]; with whole_interval also on [0, T0).
BoundReport check_weighted_f(const RiccatiSolution& solution, double tol, bool whole_interval = false);
/// -2F <= [-I, gamma](Q S + S Q)[-I; gamma] <= 2F on [T0, T].
BoundReport check_key_inequality(const RiccatiSolution& solution, double tol);

/// Quadratures of the pq bounds and the right-hand sides they are bounded by:
///   exp(int_t^s p) <= L_p                          for s < T0
///   exp(int_t^s p) <= L_p / (T - s + a_n)          for s >= T0
///   exp(-int_t^s q) <= L_q                         for s < T0
///   exp(-int_t^s q) <= L_q (T - s + b_n)           for s >= T0
/// with a_n = lambda_min / (n - gamma_min - lambda_min (1 + sqrt(1 + alpha))) and
/// b_n = lambda_max / (n - gamma_max + lambda_max). L_p and L_q depend on t and
/// n_ref only, so they hold for every n >= n_ref.
struct ExpIntegralBound {
  double exp_int_p;
  double exp_int_negq;
  double bound_p;
  double bound_negq;
  double l_p;
  double l_q;
};

/// Requires n0 < n_ref <= n and 0 <= t <= s <= T with t < T.
ExpIntegralBound exp_integral_bound(const ModelParams& params, double n, double t, double s,
                                    double n_ref);
inline ExpIntegralBound exp_integral_bound(const ModelParams& params, double n, double t, double s) {
  return exp_integral_bound(params, n, t, s, n);
}

/// int_t^s of p^n (or q^n) by adaptive Simpson quadrature, split at T0.
double integrate_p(const ModelParams& params, double n, double t, double s);
double integrate_q(const ModelParams& params, double n, double t, double s);

/// sup over stored points of |E^n(s)| / (T - s + eps).
double e_decay_constant(const RiccatiSolution& solution, double eps);

/// Columns t, margin; 12 significant digits.
void write_report_csv(const BoundReport& report, std::ostream& out);
/// {"bound", "verdict", "worst_t", "worst_margin", "tolerance"} as JSON text.
std::string report_summary_json(const BoundReport& report);

}  // namespace multiexec
