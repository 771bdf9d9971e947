// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "multiexec/bounds.hpp"
#include "multiexec/comparison.hpp"
#include "multiexec/trajectory.hpp"

namespace {

using namespace multiexec;
using multiexec::testing::fig1;
using multiexec::testing::scalar;
using multiexec::testing::twap;

const GridSpec kGrid{0.0, 1.0, 2000, 8.0};
const VectorXd kOnes2 = VectorXd::Ones(2);
const VectorXd kZero2 = VectorXd::Zero(2);

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome closed_form_oracle() {
  const auto start = std::chrono::steady_clock::now();
  const auto sol = solve_penalized(twap(), 3.0, kGrid);
  const double elapsed = seconds_since(start);
  double err = 0.0;
  for (std::size_t k = 0; k < sol.size(); ++k) {
    const BlockSym q = sol.value(k);
    const double exact = 1.0 / ((1.0 - sol.grid()[k]) + 0.5);
    err = std::max(err, std::abs(q.a(0, 0) - q.b(0, 0) - exact) / exact);
  }
  return {err <= 1e-6 && elapsed < 1.0, "max rel err " + fmt(err) + " (<= 1e-6), " + fmt(elapsed) + " s (< 1 s)"};
}

Outcome twap_limit() {
  std::vector<double> sups;
  for (double n = 8.0; n <= 2048.0; n *= 2.0) {
    const Trajectory tr = simulate(solve_penalized(twap(), n, kGrid), 0.0, VectorXd::Ones(1), VectorXd::Zero(1));
    double e = 0.0;
    for (std::size_t i = 0; i < tr.t.size(); ++i)
      if (tr.t[i] <= 0.95) e = std::max(e, std::abs(tr.x[i](0) - (1.0 - tr.t[i])));
    sups.push_back(e);
  }
  bool decreasing = true;
  for (std::size_t k = 1; k < sups.size(); ++k) decreasing = decreasing && sups[k] < sups[k - 1];
  return {decreasing && sups.back() <= 1e-3,
          std::string(decreasing ? "strictly decreasing" : "NOT decreasing") + ", final sup " + fmt(sups.back()) +
              " (<= 1e-3)"};
}

Outcome value_consistency() {
  double worst = 0.0;
  for (double k : {-0.5, 0.0, 0.5}) {
    const auto sol = solve_penalized(fig1(k), 256.0, kGrid);
    const double c = cost(simulate(sol, 0.0, kOnes2, kZero2), 256.0);
    const double v = value_at(sol, 0.0, kOnes2, kZero2);
    worst = std::max(worst, std::abs(c - v) / v);
  }
  return {worst <= 2e-3, "max relative gap " + fmt(worst) + " (<= 2e-3)"};
}

Outcome ladder_monotonicity() {
  const ModelParams p = fig1();
  const std::vector<double> ladder = default_ladder(n0(p), 6);
  std::vector<RiccatiSolution> sols;
  for (double n : ladder) sols.push_back(solve_penalized(p, n, kGrid));
  double worst = 1e300;
  for (std::size_t k = 1; k < sols.size(); ++k)
    for (int j = 0; j < 50; ++j) {
      const double t = j / 49.0;
      const MatrixXd hi = sols[k].eval_full(t);
      const MatrixXd diff = hi - sols[k - 1].eval_full(t);
      worst = std::min(worst, min_eigenvalue(diff) + 1e-7 * (1.0 + frobenius(hi)));
    }
  return {worst >= 0.0, "5 rung pairs x 50 times, worst slack " + fmt(worst) + " (>= 0)"};
}

Outcome envelope_containment() {
  const BoundReport r = check_envelope(solve_penalized(fig1(), 64.0, kGrid), 1e-7);
  return {r.pass, "worst margin " + fmt(r.worst_margin) + " at t = " + fmt(r.worst_t) + " (>= -1e-7)"};
}

Outcome weighted_f() {
  const ModelParams p = fig1();
  const double n = 64.0;
  const BoundReport r = check_weighted_f(solve_penalized(p, n, kGrid), 1e-7);
  const PQ end = pq_bounds(p, n, p.horizon);
  const double q_exact = (n - p.gamma_max()) / p.lambda_max();
  const double p_exact = (n - p.gamma_min()) / p.lambda_min();
  const double q_err = std::abs(end.q - q_exact) / q_exact, p_err = std::abs(end.p - p_exact) / p_exact;
  const bool exact = q_err <= 4e-16 && p_err <= 4e-16;
  return {r.pass && exact, "worst margin " + fmt(r.worst_margin) + " (>= -1e-7), terminal q/p rel err " + fmt(q_err) +
                               "/" + fmt(p_err) + " (<= 4e-16)"};
}

Outcome comparison_principle() {
  const std::vector<double> grid = make_grid(GridSpec{0.0, 1.0, 200, 1.0});
  double worst = 1e300;
  int holds = 0, total = 0;
  for (int d = 1; d <= 3; ++d)
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto [a, b] = random_ordered_pair(seed, d, 1.0);
      const ComparisonReport r = check_comparison(a, b, grid, 1e-8);
      ++total;
      holds += r.verdict == ComparisonVerdict::holds;
      worst = std::min(worst, r.conclusion.worst_margin);
    }
  GeneralRiccatiInstance inst;
  inst.d = 1;
  inst.g = MatrixSchedule::constant(MatrixXd::Zero(1, 1));
  inst.h = MatrixSchedule::constant(MatrixXd::Ones(1, 1));
  inst.source = MatrixSchedule::constant(MatrixXd::Ones(1, 1));
  inst.terminal = MatrixXd::Zero(1, 1);
  inst.horizon = 1.0;
  const KPath k = solve_general(inst, grid);
  double tanh_err = 0.0;
  for (std::size_t i = 0; i < k.t.size(); ++i) tanh_err = std::max(tanh_err, std::abs(k.k[i](0, 0) - std::tanh(1.0 - k.t[i])));
  return {holds == total && worst >= -1e-8 && tanh_err <= 1e-8,
          std::to_string(holds) + "/" + std::to_string(total) + " pairs hold, worst margin " + fmt(worst) +
              " (>= -1e-8), tanh err " + fmt(tanh_err) + " (<= 1e-8)"};
}

Outcome liquidation_decay() {
  const ModelParams p = fig1();
  std::vector<RiccatiSolution> ladder;
  for (double n : default_ladder(n0(p), 12)) ladder.push_back(solve_penalized(p, n, kGrid));
  const LiquidationReport r = check_liquidation(ladder, 0.0, kOnes2, kZero2, 1e-2);
  return {r.pass, "n in [" + fmt(r.n.front()) + ", " + fmt(r.n.back()) + "], final n|X(T)|^2 " + fmt(r.penalty.back()) +
                      " (< 1e-2, " + (r.penalty_decreasing ? "decreasing" : "NOT decreasing") + "), final Y'X " +
                      fmt(r.cross.back()) + " (" + (r.cross_decreasing ? "decreasing" : "NOT decreasing") + ")"};
}

// Top rung of a converged ladder on [0, T - 0.05].
RiccatiSolution limit_top(const ModelParams& p) {
  return solve_ladder(p, p.horizon - 0.05, default_ladder(n0(p), 20), 1e-4, kGrid).top;
}

Outcome figure_one() {
  std::vector<double> v;
  bool faster = true;
  for (double k : {-0.5, 0.0, 0.5}) {
    const RiccatiSolution top = limit_top(fig1(k));
    v.push_back(value_at(top, 0.0, kOnes2, kZero2));
    const VectorXd xi = feedback(top.eval(0.0), kOnes2, kZero2, fig1(k));
    faster = faster && xi(1) > xi(0);
  }
  const bool increasing = v[0] < v[1] && v[1] < v[2];
  return {increasing && faster, "V = " + fmt(v[0]) + ", " + fmt(v[1]) + ", " + fmt(v[2]) +
                                    (increasing ? " increasing" : " NOT increasing") +
                                    (faster ? ", asset 2 faster at every k" : ", asset 2 NOT faster")};
}

Outcome figure_three() {
  std::vector<double> rate;
  for (double g : {0.5, 1.0, 2.0, 4.0}) {
    const ModelParams p = scalar(0.1, g, 1.0, 0.0);
    const RiccatiSolution top = limit_top(p);
    rate.push_back(feedback(top.eval(0.0), VectorXd::Ones(1), VectorXd::Zero(1), p)(0));
  }
  bool increasing = true;
  std::string list;
  for (std::size_t k = 0; k < rate.size(); ++k) {
    if (k) increasing = increasing && rate[k] > rate[k - 1];
    list += (k ? ", " : "") + fmt(rate[k]);
  }
  return {increasing, "xi(0) = " + list + (increasing ? " increasing" : " NOT increasing")};
}

Outcome fundamental_bound() {
  const ModelParams p = fig1();
  double worst = 1e300;
  for (double n : {64.0, 256.0}) {
    const auto sol = solve_penalized(p, n, kGrid);
    const FundamentalPath fp = fundamental(sol, sol.nodes());
    for (std::size_t i = 0; i < fp.t.size(); ++i) {
      const double rhs = p.d * p.lambda_max() / p.lambda_min() * std::exp(-2.0 * integrate_q(p, n, 0.0, fp.t[i]));
      worst = std::min(worst, rhs - fp.phi[i].squaredNorm());
    }
  }
  return {worst >= 0.0, "worst margin " + fmt(worst) + " (>= 0)"};
}

Outcome first_order_optimality() {
  const auto sol = solve_penalized(fig1(), 256.0, kGrid);
  const double base = cost(simulate(sol, 0.0, kOnes2, kZero2), 256.0);
  bool ok = true;
  double lo = 1e300, hi = -1e300;
  for (int b = 0; b < 5; ++b) {
    const VectorXd dir = Eigen::Vector2d(std::cos(b), std::sin(b + 0.3));
    Bump bump{dir, 0.15 + 0.17 * b, 0.1, 1e-2};
    const double big = cost(simulate_perturbed(sol, kOnes2, kZero2, sol.nodes(), bump), 256.0) - base;
    bump.amplitude = 5e-3;
    const double small = cost(simulate_perturbed(sol, kOnes2, kZero2, sol.nodes(), bump), 256.0) - base;
    const double ratio = big / small;
    ok = ok && big > 0.0 && small > 0.0 && ratio >= 3.5 && ratio <= 4.5;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  return {ok, "5 bumps raise the cost, excess ratio in [" + fmt(lo) + ", " + fmt(hi) + "] (within [3.5, 4.5])"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"closed-form oracle", closed_form_oracle},
      {"TWAP limit", twap_limit},
      {"value consistency", value_consistency},
      {"ladder monotonicity", ladder_monotonicity},
      {"envelope containment", envelope_containment},
      {"weighted-F sandwich", weighted_f},
      {"comparison principle", comparison_principle},
      {"liquidation decay", liquidation_decay},
      {"two-asset correlation sweep", figure_one},
      {"persistent-impact sweep", figure_three},
      {"fundamental-matrix bound", fundamental_bound},
      {"first-order optimality", first_order_optimality},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o{false, ""};
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
