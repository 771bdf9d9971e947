#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "multiexec/bounds.hpp"

namespace {

using namespace multiexec;
using multiexec::testing::fig1;
using multiexec::testing::scalar;
using multiexec::testing::twap;

const GridSpec kGrid{0.0, 1.0, 2000, 8.0};

ModelParams random_params(std::uint64_t seed, int d) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.5, 2.0), res(0.0, 2.0);
  MatrixXd m(d, d), s(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      m(i, j) = u(rng);
      s(i, j) = u(rng);
    }
  const MatrixXd lambda = m * m.transpose() + 0.5 * MatrixXd::Identity(d, d);
  VectorXd gamma(d), rho(d);
  for (int i = 0; i < d; ++i) {
    gamma(i) = pos(rng);
    rho(i) = res(rng);
  }
  return make_constant_params(lambda, gamma, rho, s * s.transpose(), 1.0);
}

TEST(Thresholds, RiskNeutralScalar) {
  const ModelParams p = twap();
  EXPECT_EQ(alpha(p), 0.0);
  EXPECT_EQ(beta(p), 3.0);
  EXPECT_EQ(n0(p), 5.0);
}

TEST(Thresholds, FigureOne) {
  const ModelParams p = fig1();
  EXPECT_NEAR(alpha(p), 2.0 + std::sqrt(2.0), 1e-14);
  EXPECT_EQ(beta(p), 5.0);
  EXPECT_EQ(n0(p), 7.0);
}

TEST(Thresholds, AlphaMonotoneInRisk) {
  double prev = -1.0;
  for (double s : {0.0, 0.5, 1.0, 4.0, 10.0}) {
    const double a = alpha(scalar(1.0, 1.0, 1.0, s));
    EXPECT_GE(a, prev);
    prev = a;
  }
}

TEST(Layer, FigureOneStart) { EXPECT_NEAR(t0(fig1()), 0.972027972027972028, 1e-15); }

TEST(Layer, ClampsAtZeroForShortHorizon) {
  ModelParams p = fig1();
  p.horizon = 0.01;
  EXPECT_EQ(t0(p), 0.0);
}

TEST(Layer, WidthIndependentOfHorizon) {
  ModelParams p = fig1();
  const double width = p.horizon - t0(p);
  for (double h : {2.0, 5.0, 10.0}) {
    p.horizon = h;
    EXPECT_NEAR(h - t0(p), width, 1e-12);
  }
}

TEST(Arccoth, DomainAndValue) {
  EXPECT_NEAR(arccoth(2.0), 0.5 * std::log(3.0), 1e-15);
  EXPECT_THROW(arccoth(1.0), PreconditionError);
  EXPECT_THROW(arccoth(0.5), PreconditionError);
}

TEST(ScalarTriple, ClosedFormWithoutRiskOrResilience) {
  const auto g = make_grid(kGrid);
  const double lambda = 2.0, gamma = 1.5, n = 9.0;
  const auto tr = scalar_triple_solve(lambda, gamma, ScalarSchedule::constant(0.0), ScalarSchedule::constant(0.0), n, g);
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    const double exact = gamma + 1.0 / ((1.0 - tr.t[k]) / lambda + 1.0 / (n - gamma));
    EXPECT_NEAR(tr.a[k], exact, 1e-8 * exact);
    EXPECT_NEAR(tr.b[k], 1.0, 1e-12);
    EXPECT_NEAR(tr.c[k], 1.0 / gamma, 1e-12);
  }
}

TEST(ScalarTriple, TerminalValuesAndPrioriBounds) {
  const auto g = make_grid(kGrid);
  const double lambda = 1.0, gamma = 1.0, rho = 1.0, sigma = 2.0, n = 20.0;
  const auto tr = scalar_triple_solve(lambda, gamma, ScalarSchedule::constant(sigma), ScalarSchedule::constant(rho), n, g);
  EXPECT_EQ(tr.a.back(), n);
  EXPECT_EQ(tr.b.back(), 1.0);
  EXPECT_EQ(tr.c.back(), 1.0 / gamma);
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    const auto b = scalar_priori_bounds(lambda, gamma, rho, sigma, n, 1.0 - tr.t[k]);
    const double d = tr.a[k] - gamma * tr.b[k];
    const double tol = 1e-8 * (1.0 + std::abs(d));
    EXPECT_GE(d, b.d_lo - tol);
    EXPECT_LE(d, b.d_hi + tol);
    EXPECT_GE(tr.b[k], b.b_lo - tol);
    EXPECT_GE(tr.c[k], b.c_lo - tol);
    EXPECT_LE(tr.c[k], b.c_hi + tol);
  }
}

TEST(PrioriBounds, TightAtTerminalTime) {
  const auto b = scalar_priori_bounds(1.0, 2.0, 1.0, 1.0, 7.0, 0.0);
  EXPECT_DOUBLE_EQ(b.d_lo, 5.0);
  EXPECT_DOUBLE_EQ(b.d_hi, 5.0);
  EXPECT_EQ(b.c_lo, 0.5);
  EXPECT_EQ(b.c_hi, 0.5);
  EXPECT_EQ(b.b_lo, 1.0);
}

TEST(PrioriBounds, HighPrecisionReferenceValues) {
  const auto b = scalar_priori_bounds(1.0, 1.0, 1.0, 1.0, 7.0, 1.0);
  // 30-digit references computed independently.
  EXPECT_NEAR(b.d_hi, 1.52153777441269122, 1e-14);
  EXPECT_NEAR(b.d_lo, 0.460547476761872348, 1e-15);
}

TEST(PrioriBounds, DegenerateKappaIsTheLimit) {
  const double exact = 1.0 / (0.4 + 1.0 / 6.0);
  EXPECT_NEAR(scalar_priori_bounds(1.0, 1.0, 0.0, 0.0, 7.0, 0.4).d_hi, exact, 1e-14);
  EXPECT_NEAR(d_upper(1.0, 1.0, 1e-9, 7.0, 0.4), exact, 1e-8);
}

// Both D bounds rise towards the terminal value n - gamma when it exceeds lambda kappa.
TEST(PrioriBounds, MonotoneInTime) {
  double lo_prev = -1.0, hi_prev = -1.0, c_prev = -1.0;
  for (int k = 0; k <= 100; ++k) {
    const double t = k / 100.0;
    const auto b = scalar_priori_bounds(2.0, 1.0, 1.5, 3.0, 12.0, 1.0 - t);
    EXPECT_GE(b.d_lo, lo_prev);
    EXPECT_GE(b.d_hi, hi_prev);
    EXPECT_GE(b.c_lo, c_prev);
    EXPECT_LE(b.d_lo, b.d_hi * (1.0 + 1e-14));
    lo_prev = b.d_lo;
    hi_prev = b.d_hi;
    c_prev = b.c_lo;
  }
}

TEST(PrioriBounds, UpperBoundBelowUnitArgumentUsesTanh) {
  // (n - gamma) / (lambda kappa) < 1: the solution rises towards lambda kappa.
  const double kappa = 4.0;
  const double v0 = d_upper(1.0, 1.0, kappa, 2.0, 0.0);
  const double v1 = d_upper(1.0, 1.0, kappa, 2.0, 1.0);
  EXPECT_DOUBLE_EQ(v0, 1.0);
  EXPECT_GT(v1, v0);
  EXPECT_LT(v1, kappa);
}

TEST(Envelope, TerminalValues) {
  ModelParams p = fig1();
  p.gamma << 1.0, 2.0;
  const auto e = envelope_at(p, 64.0, 1.0);
  EXPECT_DOUBLE_EQ(e.a_lo(0), 63.0);
  EXPECT_DOUBLE_EQ(e.a_lo(1), 62.0);
  EXPECT_EQ(e.c_lo, e.c_hi);
  EXPECT_DOUBLE_EQ(e.c_hi(1), 0.5);
}

TEST(Envelope, ContainsFigureOneSolution) {
  for (double k : {-0.5, 0.0, 0.5}) {
    const auto r = check_envelope(solve_penalized(fig1(k), 64.0, kGrid), 1e-7);
    EXPECT_TRUE(r.pass) << "k=" << k << " worst " << r.worst_margin << " at " << r.worst_t;
  }
}

TEST(Envelope, ContainsRandomModels) {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const ModelParams p = random_params(seed, 1 + static_cast<int>(seed % 3));
    const double n = 2.0 * n0(p);
    const auto sol = solve_penalized(p, n, GridSpec{0.0, 1.0, 400, 8.0});
    EXPECT_TRUE(check_envelope(sol, 1e-7).pass) << "seed " << seed;
    EXPECT_TRUE(check_decoupled(sol, 1e-7).pass) << "seed " << seed;
    EXPECT_TRUE(check_weighted_f(sol, 1e-7).pass) << "seed " << seed;
    EXPECT_TRUE(check_key_inequality(sol, 1e-7 * (1.0 + n)).pass) << "seed " << seed;
  }
}

TEST(Decoupled, CollapsesOntoDecoupledModel) {
  // Scalar impact and no risk: assets decouple and both triples coincide with the solution.
  const ModelParams p = make_constant_params(2.0 * MatrixXd::Identity(2, 2), Eigen::Vector2d(1.0, 1.5),
                                             Eigen::Vector2d(0.5, 2.0), MatrixXd::Zero(2, 2), 1.0);
  const double n = 2.0 * n0(p);
  const auto sol = solve_penalized(p, n, GridSpec{0.0, 1.0, 400, 8.0});
  const auto db = decoupled_bounds(p, n, sol.grid());
  for (std::size_t k = 0; k < db.t.size(); ++k) {
    const MatrixXd q = sol.full(k);
    EXPECT_LT((db.lower[k].assemble() - db.upper[k].assemble()).norm(), 1e-12 * (1.0 + q.norm()));
    EXPECT_LT((db.lower[k].assemble() - q).norm(), 1e-7 * (1.0 + q.norm()));
  }
}

TEST(PQ, TerminalIdentities) {
  const ModelParams p = fig1();
  for (double n : {8.0, 64.0, 1e4}) {
    const PQ b = pq_bounds(p, n, 1.0);
    EXPECT_NEAR(b.q, (n - p.gamma_max()) / p.lambda_max(), 1e-12 * n);
    EXPECT_NEAR(b.p, (n - p.gamma_min()) / p.lambda_min(), 1e-12 * n);
  }
}

TEST(PQ, ExtensionBeforeLayer) {
  const ModelParams p = fig1();
  const PQ ext = pq_extension(p);
  for (double t : {0.0, 0.5, 0.97}) {
    const PQ b = pq_bounds(p, 64.0, t);
    EXPECT_EQ(b.q, ext.q);
    EXPECT_EQ(b.p, ext.p);
  }
  EXPECT_GT(ext.q, 0.0);
  EXPECT_LT(ext.q, ext.p);
}

TEST(PQ, FigureOneMidLayerValues) {
  const ModelParams p = fig1();
  const PQ b = pq_bounds(p, 64.0, 0.5 * (t0(p) + 1.0));
  EXPECT_NEAR(b.p, 34.2434903530592, 1e-10);
  EXPECT_NEAR(b.q, 5.63646057593337, 1e-11);
  EXPECT_LT(b.q, b.p);
}

TEST(PQ, RejectsPenaltyAtThreshold) { EXPECT_THROW(pq_bounds(fig1(), 7.0, 0.5), PreconditionError); }

TEST(WeightedF, ScalarClosedFormInsideSandwich) {
  const auto sol = solve_penalized(twap(), 40.0, kGrid);
  EXPECT_TRUE(check_weighted_f(sol, 1e-7, true).pass);
}

TEST(WeightedF, EqualityAtTerminalTimeForScalarImpact) {
  const ModelParams p = scalar(2.0, 1.0, 1.0, 1.0);
  const double n = 2.0 * n0(p);
  const PQ b = pq_bounds(p, n, 1.0);
  EXPECT_NEAR(b.q, (n - 1.0) / 2.0, 1e-12 * n);
  EXPECT_NEAR(b.p, b.q, 1e-12 * n);
}

TEST(WeightedF, HoldsAlongLadder) {
  for (double n : {14.0, 64.0, 256.0, 4096.0}) {
    const auto r = check_weighted_f(solve_penalized(fig1(0.5), n, kGrid), 1e-7);
    EXPECT_TRUE(r.pass) << "n=" << n << " worst " << r.worst_margin;
  }
}

TEST(ExpIntegral, EmptyIntegral) {
  const auto b = exp_integral_bound(fig1(), 64.0, 0.3, 0.3);
  EXPECT_DOUBLE_EQ(b.exp_int_p, 1.0);
  EXPECT_DOUBLE_EQ(b.exp_int_negq, 1.0);
  EXPECT_GE(b.bound_p, 1.0);
  EXPECT_GE(b.bound_negq, 1.0);
}

TEST(ExpIntegral, BoundsHoldAcrossLadderAndTimes) {
  const ModelParams p = fig1();
  for (double n : {8.0, 64.0, 1024.0, 1e5})
    for (double s : {0.0, 0.5, 0.98, 0.999, 1.0}) {
      const auto b = exp_integral_bound(p, n, 0.0, s, 8.0);
      EXPECT_TRUE(std::isfinite(b.exp_int_p));
      EXPECT_LE(b.exp_int_p, b.bound_p) << "n=" << n << " s=" << s;
      EXPECT_LE(b.exp_int_negq, b.bound_negq) << "n=" << n << " s=" << s;
    }
}

TEST(ExpIntegral, NegativeQScalesWithLayerWidth) {
  const ModelParams p = fig1();
  const double start = t0(p);
  double l = 0.0;
  for (double n : {8.0, 64.0, 512.0, 4096.0}) {
    const auto b = exp_integral_bound(p, n, start, 1.0, 8.0);
    const double width = p.lambda_max() / (n - p.gamma_max() + p.lambda_max());
    EXPECT_LE(b.exp_int_negq / width, b.l_q);
    l = b.l_q;
  }
  EXPECT_GT(l, 0.0);
}

TEST(EDecay, ConstantNonincreasingAlongLadder) {
  double prev = 1e300;
  for (double n : {14.0, 56.0, 224.0, 896.0}) {
    const double c = e_decay_constant(solve_penalized(fig1(), n, kGrid), 1.0 / 2000);
    EXPECT_LE(c, 1.1 * prev);
    prev = c;
  }
}

TEST(Report, VerdictFollowsTolerance) {
  EXPECT_TRUE(make_report("x", {0.0, 1.0}, {-1e-9, 2.0}, 1e-8).pass);
  const auto r = make_report("x", {0.0, 0.5, 1.0}, {1.0, -1e-6, 2.0}, 1e-8);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.worst_t, 0.5);
  EXPECT_EQ(r.worst_margin, -1e-6);
}

TEST(Report, SerializesSummaryAndColumns) {
  const auto r = make_report("envelope", {0.0, 1.0}, {0.25, 0.5}, 1e-7);
  const std::string j = report_summary_json(r);
  for (const char* key : {"\"bound\": \"envelope\"", "\"verdict\": \"pass\"", "\"worst_t\"", "\"worst_margin\""})
    EXPECT_NE(j.find(key), std::string::npos) << key;
  std::ostringstream csv;
  write_report_csv(r, csv);
  EXPECT_EQ(csv.str(), "t,margin\n0,0.25\n1,0.5\n");
}

}  // namespace
