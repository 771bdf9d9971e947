#pragma once

#include <cstddef>
#include <functional>
#include <limits>

#include "multiexec/linalg.hpp"

namespace multiexec {

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0 selects a step from the local derivative scale
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 5'000'000;
};

struct OdeStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
  double last_step = 0.0;  // magnitude of the last accepted step
};

using OdeRhs = std::function<void(double t, const VectorXd& y, VectorXd& dydt)>;
using OdeObserver = std::function<void(double t, const VectorXd& y)>;
/// Applied to every accepted state, e.g. to restore symmetry.
using OdeProjection = std::function<void(VectorXd& y)>;

/// Embedded Runge-Kutta 5(4) pair of Dormand and Prince with
/// elementary step-size control. Integrates forward or backward in time and lands
/// exactly on the requested end point.
///
/// Throws NumericError when the step size underflows or max_steps is hit.
class DormandPrince {
 public:
  explicit DormandPrince(OdeOptions options = {}) : options_(options) {}

  OdeStats integrate(const OdeRhs& rhs, double t0, double t1, VectorXd& y,
                     const OdeObserver& observer = {}, const OdeProjection& project = {});

  const OdeOptions& options() const { return options_; }
  /// Carries the step size between consecutive calls on adjacent intervals.
  double suggested_step() const { return suggested_; }
  void set_suggested_step(double h) { suggested_ = h; }

 private:
  OdeOptions options_;
  double suggested_ = 0.0;
};

}  // namespace multiexec
