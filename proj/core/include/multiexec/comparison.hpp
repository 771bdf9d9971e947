#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "multiexec/bounds.hpp"
#include "multiexec/model.hpp"
#include "multiexec/ode.hpp"

namespace multiexec {

/// dK/dt = K H K - G^T K - K G - I_src on [0, T], K(T) = S.
struct GeneralRiccatiInstance {
  int d = 0;
  MatrixSchedule g;
  MatrixSchedule h;       // symmetric PSD
  MatrixSchedule source;  // symmetric
  MatrixXd terminal;      // symmetric
  double horizon = 0.0;

  /// Breakpoints of all three schedules strictly inside (0, horizon).
  std::vector<double> breakpoints() const;
};

std::vector<Violation> validate(const GeneralRiccatiInstance& instance);

struct KPath {
  std::vector<double> t;
  std::vector<MatrixXd> k;
};

/// Backward integration from the terminal value. Output times are the grid
/// with schedule breakpoints added; grid.back() must be the horizon.
KPath solve_general(const GeneralRiccatiInstance& instance, const std::vector<double>& grid,
                     const OdeOptions& options = {.rtol = 1e-11, .atol = 1e-13});

enum class ComparisonVerdict { holds, violated, inapplicable };

std::string to_string(ComparisonVerdict v);

struct ComparisonReport {
  ComparisonVerdict verdict = ComparisonVerdict::inapplicable;
  /// min over S2 - S1, H1 - H2, H2 and I2 - I1 of the smallest eigenvalue,
  /// taken over all schedule pieces.
  double hypothesis_margin = 0.0;
  std::string hypothesis_failure;  // empty when the hypotheses hold
  BoundReport conclusion;          // margin(t) = min eigenvalue of K2 - K1
};

/// Checks the hypotheses S1 <= S2, 0 <= H2 <= H1, I1 <= I2 (shared G and T);
/// when they hold, solves both instances and checks K1 <= K2 at the grid.
ComparisonReport check_comparison(const GeneralRiccatiInstance& first, const GeneralRiccatiInstance& second,
                                  const std::vector<double>& grid, double tol);

/// Ordered pair with shared G: H1 = H2 + M^T M, I2 = I1 + M^T M, S2 = S1 + M^T M.
/// Every schedule has two pieces, split at T/2. Deterministic per seed.
std::pair<GeneralRiccatiInstance, GeneralRiccatiInstance> random_ordered_pair(std::uint64_t seed, int d,
                                                                              double horizon);

/// The transformed equation of the liquidation problem as a general instance:
/// G = diag(0, -rho), H = [-I; gamma] Lambda^{-1} [-I, gamma],
/// I_src = diag(Sigma, 2 rho / gamma), S = terminal_condition(n).
GeneralRiccatiInstance bsrde_instance(const ModelParams& params, double n);

}  // namespace multiexec
