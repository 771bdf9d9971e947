#include "multiexec/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "multiexec/riccati.hpp"

namespace multiexec {

std::vector<double> GeneralRiccatiInstance::breakpoints() const {
  std::set<double> s;
  for (const auto* sched : {&g, &h, &source})
    for (double t : sched->breakpoints())
      if (t > 0.0 && t < horizon) s.insert(t);
  return {s.begin(), s.end()};
}

namespace {

std::vector<double> piece_starts(const GeneralRiccatiInstance& a) {
  std::vector<double> out{0.0};
  for (double t : a.breakpoints()) out.push_back(t);
  return out;
}

double psd_tol(const MatrixXd& m) { return 1e-10 * (1.0 + frobenius(m)); }

}  // namespace

std::vector<Violation> validate(const GeneralRiccatiInstance& instance) {
  std::vector<Violation> out;
  const int d = instance.d;
  if (d < 1) {
    out.push_back({"d", "dimension must be >= 1"});
    return out;
  }
  if (!(instance.horizon > 0.0)) out.push_back({"T", "horizon must be > 0"});
  if (instance.g.empty() || instance.h.empty() || instance.source.empty()) {
    out.push_back({"schedules", "G, H and I_src need at least one piece"});
    return out;
  }
  if (instance.terminal.rows() != d || instance.terminal.cols() != d)
    out.push_back({"S", "terminal value has wrong shape"});
  else if (symmetry_defect(instance.terminal) > psd_tol(instance.terminal))
    out.push_back({"S", "terminal value not symmetric"});
  for (const auto& p : instance.g.pieces())
    if (p.value.rows() != d || p.value.cols() != d) out.push_back({"G", "piece has wrong shape"});
  for (const auto& p : instance.h.pieces()) {
    if (p.value.rows() != d || p.value.cols() != d) {
      out.push_back({"H", "piece has wrong shape"});
    } else {
      if (symmetry_defect(p.value) > psd_tol(p.value)) out.push_back({"H", "piece not symmetric"});
      if (min_eigenvalue(p.value) < -psd_tol(p.value)) out.push_back({"H", "piece not positive semidefinite"});
    }
  }
  for (const auto& p : instance.source.pieces()) {
    if (p.value.rows() != d || p.value.cols() != d)
      out.push_back({"I_src", "piece has wrong shape"});
    else if (symmetry_defect(p.value) > psd_tol(p.value))
      out.push_back({"I_src", "piece not symmetric"});
  }
  return out;
}

KPath solve_general(const GeneralRiccatiInstance& instance, const std::vector<double>& grid,
                    const OdeOptions& options) {
  const auto violations = validate(instance);
  if (!violations.empty()) throw PreconditionError("solve_general: " + violations.front().field + ": " +
                                                   violations.front().message);
  if (grid.size() < 2) throw PreconditionError("solve_general: grid needs at least two points");
  if (std::abs(grid.back() - instance.horizon) > 1e-12 * std::max(1.0, instance.horizon))
    throw PreconditionError("solve_general: grid must end at the horizon");
  const std::vector<double> nodes = merge_nodes(grid, instance.breakpoints());

  const int d = instance.d;
  KPath out;
  out.t = nodes;
  out.k.resize(nodes.size());
  out.k.back() = symmetrize(instance.terminal);
  VectorXd y = Eigen::Map<const VectorXd>(out.k.back().data(), d * d);
  DormandPrince stepper(options);
  const OdeProjection project = [d](VectorXd& state) {
    Eigen::Map<MatrixXd> k(state.data(), d, d);
    k = symmetrize(k).eval();
  };
  for (std::size_t i = nodes.size() - 1; i > 0; --i) {
    const double mid = 0.5 * (nodes[i - 1] + nodes[i]);
    const MatrixXd& g = instance.g.at(mid);
    const MatrixXd& h = instance.h.at(mid);
    const MatrixXd& src = instance.source.at(mid);
    const OdeRhs f = [&, d](double, const VectorXd& state, VectorXd& out_v) {
      Eigen::Map<const MatrixXd> k(state.data(), d, d);
      out_v.resize(d * d);
      Eigen::Map<MatrixXd>(out_v.data(), d, d) = k * h * k - g.transpose() * k - k * g - src;
    };
    stepper.integrate(f, nodes[i], nodes[i - 1], y, {}, project);
    out.k[i - 1] = Eigen::Map<const MatrixXd>(y.data(), d, d);
  }
  return out;
}

std::string to_string(ComparisonVerdict v) {
  switch (v) {
    case ComparisonVerdict::holds:
      return "holds";
    case ComparisonVerdict::violated:
      return "violated";
    case ComparisonVerdict::inapplicable:
      return "inapplicable";
  }
  return "unknown";
}

ComparisonReport check_comparison(const GeneralRiccatiInstance& first, const GeneralRiccatiInstance& second,
                                  const std::vector<double>& grid, double tol) {
  if (first.d != second.d) throw PreconditionError("check_comparison: dimension mismatch");
  ComparisonReport report;
  report.conclusion.bound = "comparison";
  report.conclusion.tolerance = tol;
  if (first.horizon != second.horizon) {
    report.hypothesis_failure = "horizons differ";
    return report;
  }

  std::vector<double> times = piece_starts(first);
  for (double t : piece_starts(second)) times.push_back(t);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  double margin = min_eigenvalue(second.terminal - first.terminal);
  std::string failure = margin < -psd_tol(second.terminal) ? "S1 <= S2 fails" : "";
  auto note = [&](double m, double scale, const char* what) {
    margin = std::min(margin, m);
    if (failure.empty() && m < -1e-10 * (1.0 + scale)) failure = what;
  };
  for (double t : times) {
    const MatrixXd& g1 = first.g.at(t);
    if (frobenius(g1 - second.g.at(t)) > 1e-12 * (1.0 + frobenius(g1)) && failure.empty())
      failure = "G differs between the instances";
    const MatrixXd& h1 = first.h.at(t);
    const MatrixXd& h2 = second.h.at(t);
    note(min_eigenvalue(h2), frobenius(h2), "H2 >= 0 fails");
    note(min_eigenvalue(h1 - h2), frobenius(h1), "H2 <= H1 fails");
    const MatrixXd& i2 = second.source.at(t);
    note(min_eigenvalue(i2 - first.source.at(t)), frobenius(i2), "I1 <= I2 fails");
  }
  report.hypothesis_margin = margin;
  report.hypothesis_failure = failure;
  if (!failure.empty()) return report;

  const KPath k1 = solve_general(first, grid);
  const KPath k2 = solve_general(second, merge_nodes(k1.t, second.breakpoints()));
  std::vector<double> t, m;
  std::size_t j = 0;
  for (std::size_t i = 0; i < k1.t.size(); ++i) {
    while (j < k2.t.size() && k2.t[j] < k1.t[i]) ++j;
    if (j == k2.t.size() || k2.t[j] != k1.t[i]) continue;
    t.push_back(k1.t[i]);
    m.push_back(min_eigenvalue(k2.k[j] - k1.k[i]));
  }
  report.conclusion = make_report("comparison", std::move(t), std::move(m), tol);
  report.verdict = report.conclusion.pass ? ComparisonVerdict::holds : ComparisonVerdict::violated;
  return report;
}

std::pair<GeneralRiccatiInstance, GeneralRiccatiInstance> random_ordered_pair(std::uint64_t seed, int d,
                                                                              double horizon) {
  if (d < 1) throw PreconditionError("random_ordered_pair: d must be >= 1");
  if (!(horizon > 0.0)) throw PreconditionError("random_ordered_pair: horizon must be > 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto random = [&](double scale) {
    MatrixXd m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = scale * u(rng);
    return m;
  };
  auto gram = [&](double scale) {
    const MatrixXd m = random(scale);
    return MatrixXd(m.transpose() * m);
  };

  const double mid = 0.5 * horizon;
  GeneralRiccatiInstance a, b;
  a.d = b.d = d;
  a.horizon = b.horizon = horizon;
  std::vector<MatrixSchedule::Piece> g, h1, h2, i1, i2;
  for (double start : {0.0, mid}) {
    g.push_back({start, random(0.5)});
    const MatrixXd hb = gram(0.7);
    h2.push_back({start, hb});
    h1.push_back({start, MatrixXd(hb + gram(0.5))});
    const MatrixXd ia = gram(0.7);
    i1.push_back({start, ia});
    i2.push_back({start, MatrixXd(ia + gram(0.5))});
  }
  a.g = b.g = MatrixSchedule(g);
  a.h = MatrixSchedule(h1);
  b.h = MatrixSchedule(h2);
  a.source = MatrixSchedule(i1);
  b.source = MatrixSchedule(i2);
  a.terminal = gram(0.8);
  b.terminal = a.terminal + gram(0.5);
  return {std::move(a), std::move(b)};
}

GeneralRiccatiInstance bsrde_instance(const ModelParams& params, double n) {
  require_valid(params);
  GeneralRiccatiInstance inst;
  inst.d = 2 * params.d;
  inst.horizon = params.horizon;
  inst.terminal = terminal_condition(n, params).assemble();

  std::vector<double> starts{0.0};
  for (double t : params.breakpoints()) starts.push_back(t);
  std::vector<MatrixSchedule::Piece> g, h, src;
  for (double t : starts) {
    const RiccatiCoefficients c = riccati_coefficients(params, t);
    g.push_back({t, c.s});
    h.push_back({t, c.r});
    src.push_back({t, c.source});
  }
  inst.g = MatrixSchedule(g);
  inst.h = MatrixSchedule(h);
  inst.source = MatrixSchedule(src);
  return inst;
}

}  // namespace multiexec
