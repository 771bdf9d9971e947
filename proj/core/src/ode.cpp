#include "multiexec/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "multiexec/errors.hpp"

namespace multiexec {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

double error_norm(const VectorXd& err, const VectorXd& y0, const VectorXd& y1, double atol,
                  double rtol) {
  const auto n = err.size();
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    const double r = err(i) / sc;
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(n));
}

}  // namespace

OdeStats DormandPrince::integrate(const OdeRhs& rhs, double t0, double t1, VectorXd& y,
                                  const OdeObserver& observer, const OdeProjection& project) {
  OdeStats stats;
  const double span = t1 - t0;
  if (span == 0.0) return stats;
  const double dir = span > 0 ? 1.0 : -1.0;
  const double length = std::abs(span);
  const auto n = y.size();

  VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);

  auto eval = [&](double t, const VectorXd& state, VectorXd& out) {
    rhs(t, state, out);
    ++stats.evaluations;
  };

  double h = options_.initial_step > 0 ? options_.initial_step : suggested_;
  if (!(h > 0)) {
    eval(t0, y, k1);
    const double d0 = error_norm(y, y, y, options_.atol, options_.rtol);
    const double d1 = error_norm(k1, y, y, options_.atol, options_.rtol);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * length : 0.01 * d0 / d1;
  }
  h = std::min({h, length, options_.max_step});

  double t = t0;
  const double min_step = 64.0 * std::numeric_limits<double>::epsilon() *
                          std::max({std::abs(t0), std::abs(t1), 1.0});
  while (dir * (t1 - t) > 0) {
    if (stats.accepted + stats.rejected >= options_.max_steps) {
      std::ostringstream os;
      os << "ODE integration exceeded " << options_.max_steps << " steps";
      throw NumericError(os.str(), t);
    }
    bool last = false;
    if (h >= std::abs(t1 - t) * (1.0 - 1e-12)) {
      h = std::abs(t1 - t);
      last = true;
    }
    if (h < min_step && !last) {
      std::ostringstream os;
      os << "step size underflow at t = " << t;
      throw NumericError(os.str(), t);
    }
    const double hs = dir * h;

    eval(t, y, k1);
    ytmp = y + hs * (a21 * k1);
    eval(t + c2 * hs, ytmp, k2);
    ytmp = y + hs * (a31 * k1 + a32 * k2);
    eval(t + c3 * hs, ytmp, k3);
    ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
    eval(t + c4 * hs, ytmp, k4);
    ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    eval(t + c5 * hs, ytmp, k5);
    ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    eval(last ? t1 : t + hs, ytmp, k6);
    ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    eval(last ? t1 : t + hs, ynew, k7);
    err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const double en = error_norm(err, y, ynew, options_.atol, options_.rtol);
    if (!std::isfinite(en)) {
      ++stats.rejected;
      h *= 0.2;
      if (h < min_step) throw NumericError("non-finite state during integration", t);
      continue;
    }
    if (en <= 1.0) {
      t = last ? t1 : t + hs;
      y = ynew;
      if (project) project(y);
      ++stats.accepted;
      stats.last_step = h;
      if (observer) observer(t, y);
      const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      // keep the natural step for the next call even if this one was clipped
      if (!last) suggested_ = std::min(h * fac, options_.max_step);
      h = std::min(h * fac, options_.max_step);
    } else {
      ++stats.rejected;
      h *= std::clamp(0.9 * std::pow(en, -0.2), 0.2, 1.0);
    }
  }
  if (suggested_ <= 0) suggested_ = stats.last_step;
  return stats;
}

}  // namespace multiexec
