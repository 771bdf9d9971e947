#include "multiexec/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <nlohmann/json.hpp>

#include "multiexec/io.hpp"

namespace multiexec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double coth(double x) { return 1.0 / std::tanh(x); }

void require_above_n0(const ModelParams& params, double n, const char* who) {
  const double threshold = n0(params);
  if (!(n > threshold)) {
    std::ostringstream os;
    os << who << ": requires n > n0 = " << threshold << ", got n = " << n;
    throw PreconditionError(os.str());
  }
}

}  // namespace

double alpha(const ModelParams& params) {
  return (params.sigma_sup() + 2.0 * params.gamma_max() * params.rho_sup()) / params.lambda_min();
}

double beta(const ModelParams& params) {
  const double r = params.rho_sup();
  return 3.0 + 2.0 * r * r;
}

double n0(const ModelParams& params) {
  const double first = params.lambda_min() * (std::sqrt(1.0 + alpha(params)) + 1.0) + params.gamma_min();
  const double second = (beta(params) + 1.0) * params.gamma_max() + 1.0;
  return std::max(first, second);
}

double t0(const ModelParams& params, double n0_val) {
  const double threshold = n0(params);
  if (n0_val < threshold) {
    std::ostringstream os;
    os << "t0: n0 value " << n0_val << " is below n0 = " << threshold;
    throw PreconditionError(os.str());
  }
  const double b = beta(params);
  const double lmin = params.lambda_min();
  double out = 0.0;
  for (int i = 0; i < params.d; ++i) {
    const double g = params.gamma(i);
    const double width = lmin / (g * (0.5 + b)) * (n0_val - (b + 1.0) * g) / (n0_val - 0.5 * g);
    out = std::max(out, params.horizon - width);
  }
  if (!(out < params.horizon))
    throw NumericError("t0: terminal layer start is not below the horizon", out);
  return out;
}

double arccoth(double z) {
  if (!(z > 1.0)) {
    std::ostringstream os;
    os << "arccoth: argument " << z << " is not > 1";
    throw PreconditionError(os.str());
  }
  return 0.5 * std::log1p(2.0 / (z - 1.0));
}

ScalarTriple scalar_triple_solve(double lambda, double gamma, const ScalarSchedule& sigma_bar,
                                 const ScalarSchedule& rho, double n, const std::vector<double>& grid,
                                 const OdeOptions& options) {
  if (!(n > gamma)) throw PreconditionError("scalar_triple_solve: requires n > gamma");
  if (!(lambda > 0.0) || !(gamma > 0.0)) throw PreconditionError("scalar_triple_solve: lambda, gamma must be > 0");
  if (grid.size() < 2) throw PreconditionError("scalar_triple_solve: grid needs at least two points");
  std::vector<double> extra = sigma_bar.breakpoints();
  for (double t : rho.breakpoints()) extra.push_back(t);
  const std::vector<double> nodes = merge_nodes(grid, extra);

  ScalarTriple out;
  out.t.resize(nodes.size());
  out.a.resize(nodes.size());
  out.b.resize(nodes.size());
  out.c.resize(nodes.size());
  VectorXd y(3);
  y << n, 1.0, 1.0 / gamma;
  const std::size_t last = nodes.size() - 1;
  out.t[last] = nodes[last];
  out.a[last] = y(0);
  out.b[last] = y(1);
  out.c[last] = y(2);

  DormandPrince stepper(options);
  for (std::size_t k = last; k > 0; --k) {
    const double mid = 0.5 * (nodes[k - 1] + nodes[k]);
    const double s = sigma_bar.at(mid), r = rho.at(mid);
    const OdeRhs f = [=](double, const VectorXd& v, VectorXd& dv) {
      const double dd = v(0) - gamma * v(1);
      const double ee = gamma * v(2) - v(1);
      dv.resize(3);
      dv(0) = -s + dd * dd / lambda;
      dv(1) = r * v(1) - ee * dd / lambda;
      dv(2) = 2.0 * r * v(2) - 2.0 * r / gamma + ee * ee / lambda;
    };
    stepper.integrate(f, nodes[k], nodes[k - 1], y);
    out.t[k - 1] = nodes[k - 1];
    out.a[k - 1] = y(0);
    out.b[k - 1] = y(1);
    out.c[k - 1] = y(2);
  }
  return out;
}

double d_lower(double lambda, double gamma, double n, double tau) {
  const double x = gamma * tau / lambda;
  return gamma / (std::expm1(x) + std::exp(x) * gamma / (n - gamma));
}

double d_upper(double lambda, double gamma, double kappa, double n, double tau) {
  const double terminal = n - gamma;
  if (kappa == 0.0) return lambda / (tau + lambda / terminal);
  const double z = terminal / (lambda * kappa);
  if (z > 1.0) return lambda * kappa * coth(kappa * tau + arccoth(z));
  if (z == 1.0) return lambda * kappa;
  return lambda * kappa * std::tanh(kappa * tau + std::atanh(z));
}

ScalarBounds scalar_priori_bounds(double lambda, double gamma, double rho_inf, double sigma_inf,
                                  double n, double tau) {
  if (!(n > gamma)) throw PreconditionError("scalar_priori_bounds: requires n > gamma");
  const double kappa = std::sqrt(2.0 / lambda * std::max(sigma_inf, gamma * rho_inf));
  ScalarBounds b{};
  b.d_lo = d_lower(lambda, gamma, n, tau);
  b.d_hi = d_upper(lambda, gamma, kappa, n, tau);
  b.b_lo = std::exp(-rho_inf * tau);
  b.c_lo = b.b_lo / gamma;
  b.c_hi = 1.0 / gamma;
  b.f_lo = b.d_lo;
  b.f_hi = b.d_hi + gamma;
  return b;
}

VectorXd envelope_kappa(const ModelParams& params) {
  VectorXd k(params.d);
  const double s = params.sigma_sup();
  for (int i = 0; i < params.d; ++i)
    k(i) = std::sqrt(2.0 / params.lambda_max() * std::max(s, params.gamma(i) * params.rho_sup(i)));
  return k;
}

EnvelopePoint envelope_at(const ModelParams& params, double n, double t) {
  if (!(n > params.gamma_max())) throw PreconditionError("envelope: requires n > gamma_max");
  const int d = params.d;
  const double tau = params.horizon - t;
  const VectorXd kappa = envelope_kappa(params);
  EnvelopePoint e{t, VectorXd(d), VectorXd(d), VectorXd(d), VectorXd(d), VectorXd(d), VectorXd(d)};
  for (int i = 0; i < d; ++i) {
    const double g = params.gamma(i);
    const double lo = d_lower(params.lambda_min(), g, n, tau);
    const double hi = d_upper(params.lambda_max(), g, kappa(i), n, tau) + g;
    e.a_lo(i) = lo;
    e.f_lo(i) = lo;
    e.a_hi(i) = hi;
    e.f_hi(i) = hi;
    e.c_lo(i) = std::exp(-params.rho_sup(i) * tau) / g;
    e.c_hi(i) = 1.0 / g;
  }
  return e;
}

std::vector<EnvelopePoint> envelope(const ModelParams& params, double n, const std::vector<double>& grid) {
  std::vector<EnvelopePoint> out;
  out.reserve(grid.size());
  for (double t : grid) out.push_back(envelope_at(params, n, t));
  return out;
}

VectorXd f_upper_nfree(const ModelParams& params, double t) {
  const double tau = params.horizon - t;
  const VectorXd kappa = envelope_kappa(params);
  VectorXd f(params.d);
  for (int i = 0; i < params.d; ++i) {
    if (tau <= 0.0) {
      f(i) = kInf;
    } else if (kappa(i) == 0.0) {
      f(i) = params.lambda_max() / tau + params.gamma(i);
    } else {
      f(i) = params.lambda_max() * kappa(i) * coth(kappa(i) * tau) + params.gamma(i);
    }
  }
  return f;
}

DecoupledBounds decoupled_bounds(const ModelParams& params, double n, const std::vector<double>& grid) {
  if (!(n > params.gamma_max())) throw PreconditionError("decoupled_bounds: requires n > gamma_max");
  const int d = params.d;
  const ScalarSchedule zero = ScalarSchedule::constant(0.0);
  const ScalarSchedule sigma_norm = params.sigma.map([](const MatrixXd& m) { return frobenius(m); });
  std::vector<ScalarTriple> lo, hi;
  for (int i = 0; i < d; ++i) {
    const ScalarSchedule rho_i = params.rho.map([i](const VectorXd& v) { return v(i); });
    lo.push_back(scalar_triple_solve(params.lambda_min(), params.gamma(i), zero, rho_i, n, grid));
    hi.push_back(scalar_triple_solve(params.lambda_max(), params.gamma(i), sigma_norm, rho_i, n, grid));
  }
  DecoupledBounds out;
  out.t = lo.front().t;
  for (std::size_t k = 0; k < out.t.size(); ++k) {
    BlockSym l = BlockSym::zero(d), u = BlockSym::zero(d);
    for (int i = 0; i < d; ++i) {
      l.a(i, i) = lo[i].a[k];
      l.b(i, i) = lo[i].b[k];
      l.c(i, i) = lo[i].c[k];
      u.a(i, i) = hi[i].a[k];
      u.b(i, i) = hi[i].b[k];
      u.c(i, i) = hi[i].c[k];
    }
    out.lower.push_back(std::move(l));
    out.upper.push_back(std::move(u));
  }
  return out;
}

PQ pq_extension(const ModelParams& params) {
  const double threshold = n0(params);
  const double start = t0(params, threshold);
  double q = kInf;
  double p = 0.0;
  const VectorXd f_hi = f_upper_nfree(params, start);
  for (int i = 0; i < params.d; ++i) {
    q = std::min(q, d_lower(params.lambda_min(), params.gamma(i), threshold, params.horizon));
    p = std::max(p, f_hi(i));
  }
  return {q / params.lambda_max(), p / params.lambda_min()};
}

namespace {

// Coth solutions on the terminal layer [T0, T], constants precomputed.
struct Layer {
  double horizon;
  double start;
  double sigma;
  double zp;
  double zq;
  double kappa1;
  double kappa2;
  PQ extension;

  Layer(const ModelParams& params, double n)
      : horizon(params.horizon),
        start(t0(params)),
        sigma(std::sqrt(1.0 + alpha(params))),
        zp((n - params.gamma_min()) / params.lambda_min()),
        zq((n - params.gamma_max()) / params.lambda_max()),
        kappa1(arccoth((zp - 1.0) / sigma)),
        kappa2(arccoth(zq + 1.0)),
        extension(pq_extension(params)) {}

  PQ at(double t) const {
    if (t < start) return extension;
    const double tau = horizon - t;
    // coth(arccoth(z)) = z; evaluate the terminal identities directly.
    if (tau == 0.0) return {zq, zp};
    return {coth(tau + kappa2) - 1.0, sigma * coth(sigma * tau + kappa1) + 1.0};
  }
};

}  // namespace

PQ pq_bounds(const ModelParams& params, double n, double t) {
  require_above_n0(params, n, "pq_bounds");
  if (!(t >= 0.0 && t <= params.horizon)) throw PreconditionError("pq_bounds: t outside [0, T]");
  return Layer(params, n).at(t);
}

BoundReport make_report(std::string bound, std::vector<double> t, std::vector<double> margin,
                        double tolerance) {
  BoundReport r;
  r.bound = std::move(bound);
  r.t = std::move(t);
  r.margin = std::move(margin);
  r.tolerance = tolerance;
  r.worst_margin = kInf;
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    if (r.margin[k] < r.worst_margin) {
      r.worst_margin = r.margin[k];
      r.worst_t = r.t[k];
    }
  }
  r.pass = r.t.empty() || r.worst_margin >= -tolerance;
  if (r.t.empty()) r.worst_margin = 0.0;
  return r;
}

namespace {

double diag_margin(const MatrixXd& m, const VectorXd& lo, const VectorXd& hi) {
  const MatrixXd l = lo.asDiagonal();
  const MatrixXd h = hi.asDiagonal();
  return std::min(min_eigenvalue(m - l), min_eigenvalue(h - m));
}

}  // namespace

BoundReport check_envelope(const RiccatiSolution& solution, double tol) {
  const ModelParams& params = solution.params();
  std::vector<double> t, margin;
  for (std::size_t k = 0; k < solution.size(); ++k) {
    const BlockSym q = solution.value(k);
    const DerivedBlocks blocks = def_blocks(q, params.gamma);
    const EnvelopePoint e = envelope_at(params, solution.n(), solution.grid()[k]);
    double m = diag_margin(q.a, e.a_lo, e.a_hi);
    m = std::min(m, diag_margin(q.c, e.c_lo, e.c_hi));
    m = std::min(m, diag_margin(symmetrize(blocks.f), e.f_lo, e.f_hi));
    t.push_back(solution.grid()[k]);
    margin.push_back(m);
  }
  return make_report("envelope", std::move(t), std::move(margin), tol);
}

BoundReport check_decoupled(const RiccatiSolution& solution, double tol) {
  const DecoupledBounds db = decoupled_bounds(solution.params(), solution.n(), solution.grid());
  std::vector<double> t, margin;
  for (std::size_t k = 0; k < db.t.size(); ++k) {
    const MatrixXd q = solution.eval_full(db.t[k]);
    const double m = std::min(min_eigenvalue(q - db.lower[k].assemble()),
                              min_eigenvalue(db.upper[k].assemble() - q));
    t.push_back(db.t[k]);
    margin.push_back(m);
  }
  return make_report("decoupled", std::move(t), std::move(margin), tol);
}

BoundReport check_weighted_f(const RiccatiSolution& solution, double tol, bool whole_interval) {
  const ModelParams& params = solution.params();
  const double start = whole_interval ? 0.0 : t0(params);
  const MatrixXd w = sym_inv_sqrt(params.lambda);
  const int d = params.d;
  std::vector<double> t, margin;
  for (std::size_t k = 0; k < solution.size(); ++k) {
    const double tk = solution.grid()[k];
    if (tk < start) continue;
    const DerivedBlocks blocks = def_blocks(solution.value(k), params.gamma);
    const MatrixXd weighted = symmetrize(w * blocks.f * w);
    const PQ b = pq_bounds(params, solution.n(), tk);
    const MatrixXd id = MatrixXd::Identity(d, d);
    t.push_back(tk);
    margin.push_back(std::min(min_eigenvalue(weighted - b.q * id), min_eigenvalue(b.p * id - weighted)));
  }
  return make_report(whole_interval ? "weighted_f_extended" : "weighted_f", std::move(t),
                     std::move(margin), tol);
}

BoundReport check_key_inequality(const RiccatiSolution& solution, double tol) {
  const ModelParams& params = solution.params();
  const double start = t0(params);
  const MatrixXd g = params.gamma_matrix();
  std::vector<double> t, margin;
  for (std::size_t k = 0; k < solution.size(); ++k) {
    const double tk = solution.grid()[k];
    if (tk < start) continue;
    const BlockSym q = solution.value(k);
    const MatrixXd r = params.rho.at(tk).asDiagonal();
    const MatrixXd f = symmetrize(def_blocks(q, params.gamma).f);
    const MatrixXd mid = symmetrize(-g * r * q.b.transpose() - q.b * r * g + g * q.c * g * r + r * g * q.c * g);
    t.push_back(tk);
    margin.push_back(std::min(min_eigenvalue(2.0 * f - mid), min_eigenvalue(mid + 2.0 * f)));
  }
  return make_report("key_inequality", std::move(t), std::move(margin), tol);
}

namespace {

template <class F>
double integrate_layer(F f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-11);
}

double integrate_pq(const ModelParams& params, double n, double t, double s, bool upper) {
  require_above_n0(params, n, upper ? "integrate_p" : "integrate_q");
  if (!(0.0 <= t && t <= s && s <= params.horizon))
    throw PreconditionError("integrate_pq: need 0 <= t <= s <= T");
  const Layer layer(params, n);
  const double c = upper ? layer.extension.p : layer.extension.q;
  const double flat = std::max(0.0, std::min(s, layer.start) - t) * c;
  // The layer term varies on the scale 1/n near T; splitting the interval
  // geometrically toward T keeps every panel smooth relative to its width.
  const double a = std::max(t, layer.start);
  double total = flat;
  double lo = a;
  while (lo < s) {
    const double gap = params.horizon - lo;
    double hi = (gap > 0.0) ? std::min(s, lo + std::max(0.5 * gap, 1.0 / n)) : s;
    if (s - hi < 1e-3 / n) hi = s;
    total += integrate_layer([&](double u) { return upper ? layer.at(u).p : layer.at(u).q; }, lo, hi);
    lo = hi;
  }
  return total;
}

}  // namespace

double integrate_p(const ModelParams& params, double n, double t, double s) {
  return integrate_pq(params, n, t, s, true);
}

double integrate_q(const ModelParams& params, double n, double t, double s) {
  return integrate_pq(params, n, t, s, false);
}

ExpIntegralBound exp_integral_bound(const ModelParams& params, double n, double t, double s,
                                    double n_ref) {
  require_above_n0(params, n_ref, "exp_integral_bound");
  if (n < n_ref) throw PreconditionError("exp_integral_bound: requires n >= n_ref");
  const double horizon = params.horizon;
  if (!(0.0 <= t && t <= s && s <= horizon && t < horizon))
    throw PreconditionError("exp_integral_bound: need 0 <= t <= s <= T and t < T");

  const double start = t0(params);
  const double sigma = std::sqrt(1.0 + alpha(params));
  const double p0 = pq_extension(params).p;

  // With z = coth(kappa_1): sinh(x + kappa_1) / sinh(kappa_1) = z sinh x + cosh x,
  // bracketed by sigma (z - 1)(T - s + a_n) from below and z e^x from above;
  // z / (z - 1) decreases in n, so n_ref fixes the constant.
  const double z_ref = ((n_ref - params.gamma_min()) / params.lambda_min() - 1.0) / sigma;
  const double k_p = z_ref / (sigma * (z_ref - 1.0));
  const double l_p = std::exp(p0 * start) * std::max(1.0, std::exp((1.0 + sigma) * horizon) * k_p);

  // sinh(tau + kappa_2) / sinh(kappa_2) = w sinh tau + cosh tau lies between
  // w tau and w cosh(T)(tau + b_n); the lower end uses tau >= T - max(t, T0).
  const double l_q =
      std::max(1.0, std::exp(horizon) * std::cosh(horizon) / (horizon - std::max(t, start)));

  const double a_n =
      params.lambda_min() / (n - params.gamma_min() - params.lambda_min() * (1.0 + sigma));
  const double b_n = params.lambda_max() / (n - params.gamma_max() + params.lambda_max());

  ExpIntegralBound out{};
  out.exp_int_p = std::exp(integrate_p(params, n, t, s));
  out.exp_int_negq = std::exp(-integrate_q(params, n, t, s));
  out.l_p = l_p;
  out.l_q = l_q;
  if (s < start) {
    out.bound_p = l_p;
    out.bound_negq = l_q;
  } else {
    out.bound_p = l_p / (horizon - s + a_n);
    out.bound_negq = l_q * (horizon - s + b_n);
  }
  return out;
}

double e_decay_constant(const RiccatiSolution& solution, double eps) {
  const ModelParams& params = solution.params();
  double worst = 0.0;
  for (std::size_t k = 0; k < solution.size(); ++k) {
    const double e = frobenius(def_blocks(solution.value(k), params.gamma).e);
    worst = std::max(worst, e / (params.horizon - solution.grid()[k] + eps));
  }
  return worst;
}

void write_report_csv(const BoundReport& report, std::ostream& out) {
  write_csv_row(out, std::vector<std::string>{"t", "margin"});
  for (std::size_t k = 0; k < report.t.size(); ++k)
    write_csv_row(out, std::vector<double>{report.t[k], report.margin[k]});
}

std::string report_summary_json(const BoundReport& report) {
  nlohmann::ordered_json j;
  j["bound"] = report.bound;
  j["verdict"] = report.pass ? "pass" : "fail";
  j["worst_t"] = report.worst_t;
  j["worst_margin"] = report.worst_margin;
  j["tolerance"] = report.tolerance;
  return j.dump(2);
}

}  // namespace multiexec
