#include "multiexec/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "multiexec/io.hpp"

namespace multiexec {

namespace {

/// Lambda^{-1} [-I, gamma], so that xi = -gain * Q * z.
MatrixXd feedback_gain(const ModelParams& params) {
  const int d = params.d;
  MatrixXd jt(d, 2 * d);
  jt.leftCols(d) = -MatrixXd::Identity(d, d);
  jt.rightCols(d) = params.gamma_matrix();
  return params.lambda_inverse() * jt;
}

double running_integrand(const ModelParams& params, const MatrixXd& sigma, const VectorXd& x,
                         const VectorXd& y, const VectorXd& xi) {
  return 0.5 * xi.dot(params.lambda * xi) + y.dot(xi) + 0.5 * x.dot(sigma * x);
}

void check_grid(const RiccatiSolution& solution, const std::vector<double>& grid) {
  if (grid.empty()) throw PreconditionError("simulate: empty grid");
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] > grid[k - 1])) throw PreconditionError("simulate: grid must be strictly increasing");
  if (grid.front() < solution.t_begin() || grid.back() > solution.t_end()) {
    std::ostringstream os;
    os << "simulate: grid [" << grid.front() << ", " << grid.back() << "] not covered by the solution ["
       << solution.t_begin() << ", " << solution.t_end() << "]";
    throw PreconditionError(os.str());
  }
}

/// Drives `integrate` over every output interval, split at the solution's
/// stored points and at `extra` times, so the Hermite dense output is smooth
/// on every integration piece.
template <class Step>
void for_each_piece(const RiccatiSolution& solution, const std::vector<double>& grid,
                    const std::vector<double>& extra, Step&& step) {
  const auto& stored = solution.grid();
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double a = grid[k], b = grid[k + 1];
    const double guard = 1e-12 * std::max(1.0, std::abs(b));
    std::vector<double> cuts{a};
    auto it = std::upper_bound(stored.begin(), stored.end(), a + guard);
    for (; it != stored.end() && *it < b - guard; ++it) cuts.push_back(*it);
    for (double t : extra)
      if (t > a + guard && t < b - guard) cuts.push_back(t);
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(b);
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j) step(cuts[j], cuts[j + 1]);
  }
}

}  // namespace

VectorXd feedback(const BlockSym& q, const VectorXd& x, const VectorXd& y, const ModelParams& params) {
  if (q.dim() != params.d || x.size() != params.d || y.size() != params.d)
    throw PreconditionError("feedback: dimension mismatch");
  const DerivedBlocks b = def_blocks(q, params.gamma);
  return params.lambda_inverse() * (b.d * x - b.e * y);
}

double value(const BlockSym& p, const VectorXd& x, const VectorXd& y) { return p.quadratic_form(x, y); }

double value_at(const RiccatiSolution& solution, double t, const VectorXd& x, const VectorXd& y) {
  return value(p_from_q(solution.eval(t), solution.params().gamma), x, y);
}

Trajectory simulate(const RiccatiSolution& solution, const VectorXd& x0, const VectorXd& y0,
                    const std::vector<double>& grid, const OdeOptions& options) {
  const ModelParams& params = solution.params();
  const int d = params.d;
  if (x0.size() != d || y0.size() != d) throw PreconditionError("simulate: initial state has wrong dimension");
  check_grid(solution, grid);
  const MatrixXd gain = feedback_gain(params);

  Trajectory traj;
  traj.d = d;
  VectorXd state(2 * d + 1);
  state << x0, y0, 0.0;
  auto record = [&](double t) {
    const VectorXd x = state.head(d), y = state.segment(d, d);
    traj.t.push_back(t);
    traj.x.push_back(x);
    traj.y.push_back(y);
    traj.xi.push_back(-gain * (solution.eval_full(t) * state.head(2 * d)));
    traj.running_cost.push_back(state(2 * d));
  };
  record(grid.front());

  DormandPrince stepper(options);
  std::size_t next = 1;
  for_each_piece(solution, grid, {}, [&](double a, double b) {
    const double mid = 0.5 * (a + b);
    const VectorXd& rho = params.rho.at(mid);
    const MatrixXd& sigma = params.sigma.at(mid);
    const OdeRhs f = [&](double s, const VectorXd& z, VectorXd& dz) {
      const VectorXd xi = -gain * (solution.eval_full(s) * z.head(2 * d));
      dz.resize(2 * d + 1);
      dz.head(d) = -xi;
      dz.segment(d, d) = -rho.cwiseProduct(z.segment(d, d)) + params.gamma.cwiseProduct(xi);
      dz(2 * d) = running_integrand(params, sigma, z.head(d), z.segment(d, d), xi);
    };
    stepper.integrate(f, a, b, state);
    if (next < grid.size() && b == grid[next]) {
      record(b);
      ++next;
    }
  });
  return traj;
}

Trajectory simulate(const RiccatiSolution& solution, double t0, const VectorXd& x0, const VectorXd& y0,
                    std::optional<double> t_end, const OdeOptions& options) {
  const double end = t_end.value_or(solution.t_end());
  if (!(t0 < end)) throw PreconditionError("simulate: need t0 < t_end");
  std::vector<double> grid{t0};
  for (double t : solution.nodes())
    if (t > t0 && t < end) grid.push_back(t);
  grid.push_back(end);
  return simulate(solution, x0, y0, grid, options);
}

VectorXd Bump::at(double t) const {
  const double u = (t - centre) / width;
  if (!(std::abs(u) < 1.0)) return VectorXd::Zero(direction.size());
  return amplitude * std::exp(1.0 - 1.0 / (1.0 - u * u)) * direction;
}

Trajectory simulate_perturbed(const RiccatiSolution& solution, const VectorXd& x0, const VectorXd& y0,
                              const std::vector<double>& grid, const Bump& bump, const OdeOptions& options) {
  const ModelParams& params = solution.params();
  const int d = params.d;
  if (x0.size() != d || y0.size() != d || bump.direction.size() != d)
    throw PreconditionError("simulate_perturbed: dimension mismatch");
  if (!(bump.width > 0.0)) throw PreconditionError("simulate_perturbed: bump width must be > 0");
  check_grid(solution, grid);
  const MatrixXd gain = feedback_gain(params);

  // [X*, Y*] of the unperturbed closed loop, then [X, Y, cost] of the perturbed path.
  Trajectory traj;
  traj.d = d;
  VectorXd state(4 * d + 1);
  state << x0, y0, x0, y0, 0.0;
  auto rate = [&](double t, const VectorXd& z) -> VectorXd {
    return -gain * (solution.eval_full(t) * z.head(2 * d)) + bump.at(t);
  };
  auto record = [&](double t) {
    traj.t.push_back(t);
    traj.x.push_back(state.segment(2 * d, d));
    traj.y.push_back(state.segment(3 * d, d));
    traj.xi.push_back(rate(t, state));
    traj.running_cost.push_back(state(4 * d));
  };
  record(grid.front());

  DormandPrince stepper(options);
  std::size_t next = 1;
  const std::vector<double> extra{bump.centre - bump.width, bump.centre, bump.centre + bump.width};
  for_each_piece(solution, grid, extra, [&](double a, double b) {
    const double mid = 0.5 * (a + b);
    const VectorXd& rho = params.rho.at(mid);
    const MatrixXd& sigma = params.sigma.at(mid);
    const OdeRhs f = [&](double s, const VectorXd& z, VectorXd& dz) {
      const VectorXd star = -gain * (solution.eval_full(s) * z.head(2 * d));
      const VectorXd xi = star + bump.at(s);
      const VectorXd x = z.segment(2 * d, d), y = z.segment(3 * d, d);
      dz.resize(4 * d + 1);
      dz.head(d) = -star;
      dz.segment(d, d) = -rho.cwiseProduct(z.segment(d, d)) + params.gamma.cwiseProduct(star);
      dz.segment(2 * d, d) = -xi;
      dz.segment(3 * d, d) = -rho.cwiseProduct(y) + params.gamma.cwiseProduct(xi);
      dz(4 * d) = running_integrand(params, sigma, x, y, xi);
    };
    stepper.integrate(f, a, b, state);
    if (next < grid.size() && b == grid[next]) {
      record(b);
      ++next;
    }
  });
  return traj;
}

double cost(const Trajectory& traj, std::optional<double> penalty_n) {
  if (traj.t.empty()) return 0.0;
  double c = 2.0 * traj.running_cost.back();
  if (penalty_n) {
    const VectorXd& x = traj.x.back();
    c += *penalty_n * x.squaredNorm() + 2.0 * traj.y.back().dot(x);
  }
  return c;
}

FundamentalPath fundamental(const RiccatiSolution& solution, const std::vector<double>& grid,
                            const OdeOptions& options) {
  const ModelParams& params = solution.params();
  const int d = params.d;
  check_grid(solution, grid);
  const MatrixXd linv = params.lambda_inverse();
  MatrixXd j(2 * d, d);
  j.topRows(d) = -MatrixXd::Identity(d, d);
  j.bottomRows(d) = params.gamma_matrix();

  FundamentalPath path;
  VectorXd state(2 * d * d);
  Eigen::Map<MatrixXd>(state.data(), d, d).setIdentity();
  Eigen::Map<MatrixXd>(state.data() + d * d, d, d).setIdentity();
  auto record = [&](double t) {
    path.t.push_back(t);
    path.phi.emplace_back(Eigen::Map<const MatrixXd>(state.data(), d, d));
    path.phi_inv.emplace_back(Eigen::Map<const MatrixXd>(state.data() + d * d, d, d));
  };
  record(grid.front());

  DormandPrince stepper(options);
  std::size_t next = 1;
  for_each_piece(solution, grid, {}, [&](double a, double b) {
    const OdeRhs f = [&](double s, const VectorXd& z, VectorXd& dz) {
      const MatrixXd m = linv * (j.transpose() * solution.eval_full(s) * j);
      Eigen::Map<const MatrixXd> phi(z.data(), d, d), psi(z.data() + d * d, d, d);
      dz.resize(2 * d * d);
      Eigen::Map<MatrixXd>(dz.data(), d, d) = -m * phi;
      Eigen::Map<MatrixXd>(dz.data() + d * d, d, d) = psi * m;
    };
    stepper.integrate(f, a, b, state);
    if (next < grid.size() && b == grid[next]) {
      record(b);
      ++next;
    }
  });
  return path;
}

ConstrainedCost constrained_cost(const Trajectory& limit_traj, const RiccatiSolution& top_rung) {
  if (limit_traj.t.empty()) throw PreconditionError("constrained_cost: empty trajectory");
  ConstrainedCost c;
  c.running = 2.0 * limit_traj.running_cost.back();
  c.tail = value_at(top_rung, limit_traj.t.back(), limit_traj.x.back(), limit_traj.y.back());
  c.total = c.running + c.tail;
  c.label = "tail-estimated";
  return c;
}

LiquidationReport check_liquidation(const std::vector<RiccatiSolution>& ladder, double t0, const VectorXd& x0,
                                    const VectorXd& y0, double threshold) {
  if (ladder.empty()) throw PreconditionError("check_liquidation: empty ladder");
  LiquidationReport r;
  r.threshold = threshold;
  for (const auto& sol : ladder) {
    if (sol.is_limit()) throw PreconditionError("check_liquidation: needs penalized solutions");
    const Trajectory traj = simulate(sol, t0, x0, y0);
    const VectorXd& x = traj.x.back();
    r.n.push_back(sol.n());
    r.penalty.push_back(sol.n() * x.squaredNorm());
    r.cross.push_back(traj.y.back().dot(x));
  }
  for (std::size_t k = 1; k < r.n.size(); ++k) {
    if (!(r.penalty[k] < r.penalty[k - 1])) r.penalty_decreasing = false;
    if (!(std::abs(r.cross[k]) < std::abs(r.cross[k - 1]))) r.cross_decreasing = false;
  }
  // An all-zero start has nothing to decay; it passes on the threshold alone.
  if (x0.isZero(0.0) && y0.isZero(0.0)) r.penalty_decreasing = r.cross_decreasing = true;
  r.pass = r.penalty_decreasing && r.cross_decreasing && r.penalty.back() < threshold &&
           std::abs(r.cross.back()) < threshold;
  return r;
}

IdentityResiduals check_identities(const Trajectory& traj, const RiccatiSolution& solution) {
  const ModelParams& params = solution.params();
  const int d = params.d;
  const MatrixXd gain = feedback_gain(params);
  const MatrixXd linv = params.lambda_inverse();
  const VectorXd& g = params.gamma;
  const std::size_t m = traj.t.size();
  IdentityResiduals res{0.0, 0.0, 0.0, 0.0};
  if (m < 2) return res;

  const VectorXd start = traj.y.front() + g.cwiseProduct(traj.x.front());
  VectorXd xint = VectorXd::Zero(d), yint = VectorXd::Zero(d), iint = VectorXd::Zero(d);
  VectorXd r_cum = VectorXd::Zero(d);
  for (std::size_t k = 1; k < m; ++k) {
    const double a = traj.t[k - 1], b = traj.t[k], h = b - a;
    const RiccatiCoefficients coef = riccati_coefficients(params, 0.5 * (a + b));
    const VectorXd& rho = params.rho.at(0.5 * (a + b));
    // Time derivatives of xi and of the Y drift at one end of the interval.
    auto ends = [&](std::size_t i, VectorXd& xi_dot, VectorXd& ydrift, VectorXd& ydrift_dot) {
      const MatrixXd q = solution.eval_full(traj.t[i]);
      VectorXd z(2 * d), zdot(2 * d);
      z << traj.x[i], traj.y[i];
      ydrift = -rho.cwiseProduct(traj.y[i]) + g.cwiseProduct(traj.xi[i]);
      zdot << -traj.xi[i], ydrift;
      xi_dot = -gain * (riccati_rhs(q, coef) * z + q * zdot);
      ydrift_dot = -rho.cwiseProduct(ydrift) + g.cwiseProduct(xi_dot);
    };
    VectorXd xa, ga, gda, xb, gb, gdb;
    ends(k - 1, xa, ga, gda);
    ends(k, xb, gb, gdb);
    xint += 0.5 * h * (traj.xi[k - 1] + traj.xi[k]) + h * h / 12.0 * (xa - xb);
    yint += 0.5 * h * (ga + gb) + h * h / 12.0 * (gda - gdb);

    const VectorXd r_a = r_cum;
    r_cum += rho * h;
    auto integrand = [&](std::size_t i, const VectorXd& r) {
      return VectorXd(r.array().exp() * g.array() * rho.array() * traj.x[i].array());
    };
    auto integrand_dot = [&](std::size_t i, const VectorXd& r) {
      return VectorXd(r.array().exp() * g.array() * rho.array() *
                      (rho.array() * traj.x[i].array() - traj.xi[i].array()));
    };
    iint += 0.5 * h * (integrand(k - 1, r_a) + integrand(k, r_cum)) +
            h * h / 12.0 * (integrand_dot(k - 1, r_a) - integrand_dot(k, r_cum));

    const VectorXd decay = (-r_cum).array().exp();
    const VectorXd forced = decay.cwiseProduct(start) + decay.cwiseProduct(iint);
    const double xs = 1.0 + traj.x.front().norm();
    const double ys = 1.0 + traj.y.front().norm() + start.norm();
    res.x_state = std::max(res.x_state, (traj.x[k] - traj.x.front() + xint).norm() / xs);
    res.y_state = std::max(res.y_state, (traj.y[k] - traj.y.front() - yint).norm() / ys);
    res.y_identity =
        std::max(res.y_identity, (traj.y[k] + g.cwiseProduct(traj.x[k]) - forced).norm() / ys);
    const DerivedBlocks blk = def_blocks(solution.eval(traj.t[k]), g);
    const VectorXd xi = linv * (symmetrize(blk.f) * traj.x[k] - blk.e * forced);
    res.strategy = std::max(res.strategy, (traj.xi[k] - xi).norm() / (1.0 + traj.xi[k].norm()));
  }
  return res;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  std::vector<std::string> header{"t"};
  for (const char* name : {"X_", "Y_", "xi_"})
    for (int i = 1; i <= traj.d; ++i) header.push_back(name + std::to_string(i));
  header.push_back("running_cost");
  write_csv_row(out, header);
  std::vector<double> row;
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    row.assign(1, traj.t[k]);
    for (const auto* v : {&traj.x[k], &traj.y[k], &traj.xi[k]})
      for (int i = 0; i < traj.d; ++i) row.push_back((*v)(i));
    row.push_back(traj.running_cost[k]);
    write_csv_row(out, row);
  }
}

}  // namespace multiexec
