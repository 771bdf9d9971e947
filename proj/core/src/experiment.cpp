#include "multiexec/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "json_params.hpp"
#include "multiexec/bounds.hpp"
#include "multiexec/comparison.hpp"
#include "multiexec/io.hpp"
#include "multiexec/trajectory.hpp"

namespace multiexec {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::k:
      return "k";
    case SweepVariable::lambda1:
      return "lambda1";
    case SweepVariable::gamma1:
      return "gamma1";
    case SweepVariable::rho1:
      return "rho1";
    case SweepVariable::gamma:
      return "gamma";
  }
  return "unknown";
}

SweepVariable parse_sweep_variable(const std::string& name) {
  for (auto v : {SweepVariable::k, SweepVariable::lambda1, SweepVariable::gamma1, SweepVariable::rho1,
                 SweepVariable::gamma})
    if (to_string(v) == name) return v;
  throw ConfigError("unknown sweep variable '" + name + "'");
}

std::vector<double> LadderSpec::resolve(const ModelParams& params) const {
  if (!levels.empty()) return levels;
  return default_ladder(n0(params), rungs);
}

ModelParams apply_sweep(const ExperimentSpec& spec, double value) {
  if (!std::isfinite(value)) throw ConfigError("sweep value is not finite");
  ModelParams p = spec.base;
  switch (spec.variable) {
    case SweepVariable::k: {
      if (p.d != 2) throw ConfigError("sweep over k needs d = 2");
      const MatrixXd& base = p.sigma.pieces().front().value;
      const double s1 = std::sqrt(base(0, 0)), s2 = std::sqrt(base(1, 1));
      MatrixXd sigma(2, 2);
      sigma << s1 * s1, value * s1 * s2, value * s1 * s2, s2 * s2;
      p.sigma = MatrixSchedule::constant(sigma);
      break;
    }
    case SweepVariable::lambda1:
      p.lambda(0, 0) = value;
      break;
    case SweepVariable::gamma1:
      p.gamma(0) = value;
      break;
    case SweepVariable::rho1:
      p.rho = p.rho.map([value](const VectorXd& r) {
        VectorXd out = r;
        out(0) = value;
        return out;
      });
      break;
    case SweepVariable::gamma:
      if (p.d != 1) throw ConfigError("sweep over gamma needs d = 1");
      p.gamma(0) = value;
      break;
  }
  require_valid(p);
  return p;
}

std::vector<ExperimentSpec> figure_specs(const std::string& out_root) {
  auto two_asset = [](double l1, double l2) {
    MatrixXd lambda(2, 2);
    lambda << l1, 0.0, 0.0, l2;
    return make_constant_params(lambda, VectorXd::Ones(2), VectorXd::Ones(2), MatrixXd::Identity(2, 2), 1.0);
  };
  auto spec = [&](std::string name, ModelParams base, SweepVariable v, std::vector<double> values) {
    ExperimentSpec s;
    s.name = name;
    s.x0 = VectorXd::Ones(base.d);
    s.y0 = VectorXd::Zero(base.d);
    s.base = std::move(base);
    s.variable = v;
    s.values = std::move(values);
    s.out_dir = (fs::path(out_root) / name).string();
    return s;
  };
  const std::vector<double> impact{0.5, 1.0, 2.0, 4.0};
  std::vector<ExperimentSpec> out;
  out.push_back(spec("fig1", two_asset(10.0, 1.0), SweepVariable::k, {-0.5, 0.0, 0.5}));
  out.push_back(spec("fig2", two_asset(1.0, 1.0), SweepVariable::lambda1, impact));
  out.push_back(spec("fig3",
                     make_constant_params(0.1 * MatrixXd::Identity(1, 1), VectorXd::Ones(1), VectorXd::Ones(1),
                                          MatrixXd::Zero(1, 1), 1.0),
                     SweepVariable::gamma, impact));
  out.push_back(spec("fig4", two_asset(1.0, 1.0), SweepVariable::gamma1, impact));
  out.push_back(spec("fig5", two_asset(0.1, 1.0), SweepVariable::rho1, impact));
  return out;
}

namespace {

std::vector<std::string> vector_cells(const VectorXd& v, int d) {
  std::vector<std::string> out;
  for (int i = 0; i < d; ++i) out.push_back(v.size() == d ? format_number(v(i)) : "");
  return out;
}

json vector_json(const VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

std::string file_tag(double v) {
  std::string s = format_number(v);
  std::replace(s.begin(), s.end(), '-', 'm');
  return s;
}

SweepRow run_one(const ExperimentSpec& spec, double v) {
  SweepRow row;
  row.value = v;
  const ModelParams params = apply_sweep(spec, v);
  const double t_max = params.horizon - spec.delta;
  if (!(spec.t0 < t_max)) throw ConfigError("sweep: need t0 < T - delta");
  const GridSpec grid{0.0, params.horizon, spec.base_steps, spec.refinement};
  const LadderResult ladder = solve_ladder(params, t_max, spec.ladder.resolve(params), spec.ladder.tol, grid);
  const RiccatiSolution& top = ladder.top;
  const Trajectory traj = simulate(top, spec.t0, spec.x0, spec.y0);
  row.n = top.n();
  row.converged = top.diagnostics().converged;
  row.v0 = value_at(top, spec.t0, spec.x0, spec.y0);
  row.xi0 = traj.xi.front();
  const auto it = std::find(traj.t.begin(), traj.t.end(), t_max);
  if (it == traj.t.end()) throw NumericError("sweep: T - delta missing from the trajectory grid", t_max);
  row.x_end = traj.x[static_cast<std::size_t>(it - traj.t.begin())];

  std::ostringstream os;
  write_trajectory_csv(traj, os);
  const fs::path file = fs::path(spec.out_dir) / ("trajectory_" + to_string(spec.variable) + "_" + file_tag(v) + ".csv");
  write_file(file.string(), os.str());
  row.trajectory_file = file.filename().string();
  row.ok = true;
  return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(const ExperimentSpec& spec, unsigned workers) {
  if (spec.values.empty()) throw ConfigError("sweep: no values");
  for (double v : spec.values)
    if (!std::isfinite(v)) throw ConfigError("sweep: values must be finite");
  if (spec.x0.size() != spec.base.d || spec.y0.size() != spec.base.d)
    throw ConfigError("sweep: initial state has the wrong dimension");
  std::vector<double> values = spec.values;
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  std::vector<SweepRow> rows(values.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      try {
        rows[i] = run_one(spec, values[i]);
      } catch (const std::exception& e) {
        rows[i] = SweepRow{};
        rows[i].value = values[i];
        rows[i].error = e.what();
      }
    }
  };
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(values.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  const int d = spec.base.d;
  std::ostringstream csv;
  std::vector<std::string> header{"value", "status", "n", "converged", "V"};
  for (int i = 1; i <= d; ++i) header.push_back("xi0_" + std::to_string(i));
  for (int i = 1; i <= d; ++i) header.push_back("X_end_" + std::to_string(i));
  write_csv_row(csv, header);
  json summary;
  summary["name"] = spec.name;
  summary["variable"] = to_string(spec.variable);
  summary["t0"] = spec.t0;
  summary["delta"] = spec.delta;
  summary["x0"] = vector_json(spec.x0);
  summary["y0"] = vector_json(spec.y0);
  summary["rows"] = json::array();
  for (const auto& r : rows) {
    std::vector<std::string> cells{format_number(r.value), r.ok ? "ok" : "failed",
                                   r.ok ? format_number(r.n) : "", r.ok ? (r.converged ? "1" : "0") : "",
                                   r.ok ? format_number(r.v0) : ""};
    for (auto& c : vector_cells(r.xi0, d)) cells.push_back(c);
    for (auto& c : vector_cells(r.x_end, d)) cells.push_back(c);
    write_csv_row(csv, cells);
    json jr;
    jr["value"] = r.value;
    jr["status"] = r.ok ? "ok" : "failed";
    if (r.ok) {
      jr["n"] = r.n;
      jr["converged"] = r.converged;
      jr["V"] = r.v0;
      jr["xi0"] = vector_json(r.xi0);
      jr["X_end"] = vector_json(r.x_end);
      jr["trajectory"] = r.trajectory_file;
    } else {
      jr["error"] = r.error;
    }
    summary["rows"].push_back(jr);
  }
  write_file((fs::path(spec.out_dir) / "summary.csv").string(), csv.str());
  write_file((fs::path(spec.out_dir) / "summary.json").string(), summary.dump(2) + "\n");
  return rows;
}

namespace {

json diagnostics_json(const RiccatiDiagnostics& d) {
  json j;
  j["max_symmetry_defect"] = d.max_symmetry_defect;
  j["min_eigenvalue"] = d.min_eigenvalue;
  j["min_eigenvalue_time"] = d.min_eigenvalue_time;
  j["min_relative_eigenvalue"] = d.min_relative_eigenvalue;
  j["steps"] = d.steps;
  j["rejected"] = d.rejected;
  return j;
}

void require_above_n0(const ModelParams& params, double n) {
  const double threshold = n0(params);
  if (!(n > threshold)) {
    std::ostringstream os;
    os << "penalty n = " << n << " must exceed n0 = " << format_number(threshold);
    throw PreconditionError(os.str());
  }
}

}  // namespace

SolveOutcome run_solve(const ModelParams& params, double n, const GridSpec& grid, const std::string& out_dir) {
  require_valid(params);
  require_above_n0(params, n);
  const RiccatiSolution sol = solve_penalized(params, n, grid);
  std::ostringstream os;
  write_solution_csv(sol, os);
  const std::string text = os.str();

  SolveOutcome out;
  out.n0 = n0(params);
  out.t0 = t0(params);
  out.solution_file = (fs::path(out_dir) / "solution.csv").string();
  out.summary_file = (fs::path(out_dir) / "summary.json").string();
  write_file(out.solution_file, text);
  write_file(out.solution_file + ".fnv1a", fnv1a_hex(text) + "\n");

  json j;
  j["n"] = n;
  j["n0"] = out.n0;
  j["T0"] = out.t0;
  j["alpha"] = alpha(params);
  j["beta"] = beta(params);
  j["grid"] = {{"base_steps", grid.base_steps}, {"refinement", grid.refinement}};
  j["rows"] = sol.nodes().size();
  j["checksum"] = fnv1a_hex(text);
  j["diagnostics"] = diagnostics_json(sol.diagnostics());
  j["params"] = detail::params_to_json(params);
  write_file(out.summary_file, j.dump(2) + "\n");
  return out;
}

double run_simulate(const ModelParams& params, double n, const GridSpec& grid, const VectorXd& x0,
                    const VectorXd& y0, const std::string& out_dir) {
  require_valid(params);
  require_above_n0(params, n);
  if (x0.size() != params.d || y0.size() != params.d) throw ConfigError("simulate: initial state has the wrong dimension");
  const RiccatiSolution sol = solve_penalized(params, n, grid);
  const Trajectory traj = simulate(sol, grid.t_start, x0, y0);
  std::ostringstream os;
  write_trajectory_csv(traj, os);
  write_file((fs::path(out_dir) / "trajectory.csv").string(), os.str());
  const double c = cost(traj, n);
  json j;
  j["n"] = n;
  j["n0"] = n0(params);
  j["x0"] = vector_json(x0);
  j["y0"] = vector_json(y0);
  j["cost"] = c;
  j["value"] = value_at(sol, grid.t_start, x0, y0);
  j["X_T"] = vector_json(traj.x.back());
  j["Y_T"] = vector_json(traj.y.back());
  write_file((fs::path(out_dir) / "summary.json").string(), j.dump(2) + "\n");
  return c;
}

SolutionTable load_checked_solution(const std::string& path, int d) {
  std::string text;
  std::string expected;
  try {
    text = read_file(path);
    expected = read_file(path + ".fnv1a");
  } catch (const std::exception& e) {
    throw ConfigError(std::string("solution file: ") + e.what());
  }
  while (!expected.empty() && std::isspace(static_cast<unsigned char>(expected.back()))) expected.pop_back();
  if (fnv1a_hex(text) != expected)
    throw ConfigError("solution file: checksum mismatch for " + path);
  std::istringstream in(text);
  return read_solution_csv(in, d);
}

namespace {

std::string fmt(double v) { return format_number(v); }

// A sequence is "nonincreasing within slack" when every term is at most
// (1 + slack) times its predecessor.
bool nonincreasing(const std::vector<double>& v, double slack) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] > (1.0 + slack) * v[k - 1]) return false;
  return true;
}

// Geometric extrapolation of a sequence with contracting positive increments;
// infinity when the tail does not contract.
double extrapolated_sup(const std::vector<double>& v) {
  const std::size_t m = v.size();
  if (m < 3) return std::numeric_limits<double>::infinity();
  double ratio = 0.0;
  for (std::size_t k = 2; k < m; ++k) {
    const double prev = v[k - 1] - v[k - 2];
    const double cur = v[k] - v[k - 1];
    if (cur <= 0.0) continue;
    if (prev <= 0.0 || cur >= prev) return std::numeric_limits<double>::infinity();
    ratio = std::max(ratio, cur / prev);
  }
  const double last = std::max(0.0, v[m - 1] - v[m - 2]);
  return *std::max_element(v.begin(), v.end()) + last * ratio / (1.0 - ratio);
}

// Uniform boundedness along the ladder: either nonincreasing within slack, or
// increasing with contracting increments towards a limit within slack of the last rung.
bool bounded_along_ladder(const std::vector<double>& v, double slack) {
  return nonincreasing(v, slack) || extrapolated_sup(v) <= (1.0 + slack) * v.back();
}

}  // namespace

std::vector<FamilyResult> run_verify(const ModelParams& params, const VerifyOptions& options,
                                     const std::string& out_dir) {
  require_valid(params);
  const double threshold = n0(params);
  const double layer = t0(params);
  std::vector<double> levels = options.ladder.empty() ? default_ladder(threshold, options.rungs) : options.ladder;
  for (double n : levels) require_above_n0(params, n);
  std::sort(levels.begin(), levels.end());
  GridSpec grid = options.grid;
  grid.t_start = 0.0;
  grid.t_end = params.horizon;

  std::vector<FamilyResult> results;
  auto family = [&](const std::string& name, auto&& body) {
    FamilyResult r{name, false, ""};
    try {
      std::ostringstream detail;
      r.pass = body(detail);
      r.detail = detail.str();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    results.push_back(std::move(r));
  };

  std::vector<RiccatiSolution> rungs;
  family("riccati_solve", [&](std::ostream& os) {
    const std::vector<double> nodes = make_grid(grid);
    bool ok = true;
    for (double n : levels) {
      rungs.push_back(solve_penalized(params, n, nodes));
      const auto& d = rungs.back().diagnostics();
      const MatrixXd terminal = terminal_condition(n, params).assemble();
      ok = ok && d.max_symmetry_defect <= 1e-10 && d.min_relative_eigenvalue >= -1e-8 &&
           rungs.back().full(rungs.back().size() - 1) == terminal && op_norm(terminal) >= n;
      os << "n=" << fmt(n) << " sym=" << fmt(d.max_symmetry_defect) << " releig=" << fmt(d.min_relative_eigenvalue)
         << "; ";
    }
    return ok;
  });
  if (rungs.size() != levels.size()) {
    write_file((fs::path(out_dir) / "verify.json").string(), "{\"pass\": false}\n");
    return results;
  }

  const VectorXd x0 = VectorXd::Ones(params.d), y0 = VectorXd::Zero(params.d);
  const std::vector<double>& nodes = rungs.front().nodes();

  family("ladder_monotonicity", [&](std::ostream& os) {
    double worst = 1e300;
    for (std::size_t k = 1; k < rungs.size(); ++k)
      for (double t : nodes) {
        const MatrixXd hi = rungs[k].eval_full(t);
        worst = std::min(worst, min_eigenvalue(hi - rungs[k - 1].eval_full(t)) / (1.0 + frobenius(hi)));
      }
    os << "min relative eigenvalue of Q^{n'} - Q^n: " << fmt(worst);
    return worst >= -1e-7;
  });

  auto per_rung = [&](const std::string& name, auto check) {
    family(name, [&](std::ostream& os) {
      bool ok = true;
      for (const auto& sol : rungs) {
        const BoundReport r = check(sol, 1e-7 * (1.0 + sol.n()));
        ok = ok && r.pass;
        os << "n=" << fmt(sol.n()) << " worst=" << fmt(r.worst_margin) << "@" << fmt(r.worst_t) << "; ";
      }
      return ok;
    });
  };
  per_rung("envelope", [](const RiccatiSolution& s, double tol) { return check_envelope(s, tol); });
  per_rung("decoupled_sandwich", [](const RiccatiSolution& s, double tol) { return check_decoupled(s, tol); });
  per_rung("weighted_f", [](const RiccatiSolution& s, double tol) { return check_weighted_f(s, tol); });
  per_rung("key_inequality", [](const RiccatiSolution& s, double tol) { return check_key_inequality(s, tol); });

  family("pq_terminal", [&](std::ostream& os) {
    bool ok = true;
    for (double n : levels) {
      const PQ pq = pq_bounds(params, n, params.horizon);
      ok = ok && pq.q == (n - params.gamma_max()) / params.lambda_max() &&
           pq.p == (n - params.gamma_min()) / params.lambda_min();
      const PQ mid = pq_bounds(params, n, 0.5 * (layer + params.horizon));
      ok = ok && mid.q < mid.p;
    }
    os << "T0=" << fmt(layer);
    return ok;
  });

  family("exp_integral", [&](std::ostream& os) {
    bool ok = true;
    double worst = 0.0;
    std::vector<double> starts{0.0, 0.5 * (layer + params.horizon)};
    if (layer > 0.0) starts.push_back(0.5 * layer);
    for (double n : levels)
      for (double t : starts)
        for (int j = 0; j <= 8; ++j) {
          const double s = t + (params.horizon - t) * j / 8.0;
          const ExpIntegralBound b = exp_integral_bound(params, n, t, s, levels.front());
          worst = std::max({worst, b.exp_int_p / b.bound_p, b.exp_int_negq / b.bound_negq});
          ok = ok && b.exp_int_p <= b.bound_p * (1 + 1e-9) && b.exp_int_negq <= b.bound_negq * (1 + 1e-9);
        }
    os << "max quadrature / bound: " << fmt(worst);
    return ok;
  });

  family("e_decay", [&](std::ostream& os) {
    std::vector<double> c;
    const double eps = params.horizon / grid.base_steps;
    for (const auto& sol : rungs) c.push_back(e_decay_constant(sol, eps));
    for (double v : c) os << fmt(v) << " ";
    return nonincreasing(c, 0.1);
  });

  family("comparison", [&](std::ostream& os) {
    const std::vector<double> g = make_grid(GridSpec{0.0, 1.0, 200, 1.0});
    int holds = 0, total = 0;
    double worst = 1e300;
    for (int d = 1; d <= 3; ++d)
      for (int k = 0; k < options.comparison_pairs; ++k) {
        const auto [a, b] = random_ordered_pair(options.seed + static_cast<std::uint64_t>(k), d, 1.0);
        const ComparisonReport r = check_comparison(a, b, g, 1e-8);
        ++total;
        holds += r.verdict == ComparisonVerdict::holds;
        worst = std::min(worst, r.conclusion.worst_margin);
      }
    const ComparisonReport ladder_pair =
        check_comparison(bsrde_instance(params, levels[0]), bsrde_instance(params, levels[1 % levels.size()]),
                         nodes, 1e-7 * (1.0 + levels.back()));
    os << holds << "/" << total << " random pairs hold, worst margin " << fmt(worst)
       << "; penalized pair " << to_string(ladder_pair.verdict);
    return holds == total && ladder_pair.verdict == ComparisonVerdict::holds;
  });

  family("liquidation", [&](std::ostream& os) {
    const LiquidationReport r = check_liquidation(rungs, 0.0, x0, y0, 1e-2);
    os << "final n|X(T)|^2=" << fmt(r.penalty.back()) << " Y(T)'X(T)=" << fmt(r.cross.back());
    return r.pass;
  });

  // Rung closest to n = 256 for the single-level checks.
  const RiccatiSolution& mid = *std::min_element(rungs.begin(), rungs.end(), [](const auto& a, const auto& b) {
    return std::abs(std::log(a.n() / 256.0)) < std::abs(std::log(b.n() / 256.0));
  });

  family("value_consistency", [&](std::ostream& os) {
    const Trajectory traj = simulate(mid, 0.0, x0, y0);
    const double v = value_at(mid, 0.0, x0, y0);
    const double rel = std::abs(cost(traj, mid.n()) - v) / std::abs(v);
    os << "n=" << fmt(mid.n()) << " relative gap " << fmt(rel);
    return rel <= 2e-3;
  });

  family("path_identities", [&](std::ostream& os) {
    const Trajectory traj = simulate(mid, 0.0, x0, y0);
    const IdentityResiduals r = check_identities(traj, mid);
    os << "x " << fmt(r.x_state) << " y " << fmt(r.y_state) << " y_identity " << fmt(r.y_identity) << " strategy "
       << fmt(r.strategy);
    return std::max({r.x_state, r.y_state, r.y_identity, r.strategy}) <= 1e-7;
  });

  family("fundamental_bound", [&](std::ostream& os) {
    bool ok = true;
    double worst = 1e300;
    const double scale = params.d * params.lambda_max() / params.lambda_min();
    for (std::size_t k = 0; k < std::min<std::size_t>(rungs.size(), 3); ++k) {
      const FundamentalPath fp = fundamental(rungs[k], rungs[k].nodes());
      for (std::size_t i = 0; i < fp.t.size(); ++i) {
        const double rhs = scale * std::exp(-2.0 * integrate_q(params, rungs[k].n(), 0.0, fp.t[i]));
        const double margin = (rhs - fp.phi[i].squaredNorm()) / rhs;
        worst = std::min(worst, margin);
        ok = ok && margin >= -1e-9;
      }
    }
    os << "min relative margin " << fmt(worst);
    return ok;
  });

  family("trajectory_bounds", [&](std::ostream& os) {
    std::vector<double> xr, ym, xim;
    for (const auto& sol : rungs) {
      const Trajectory traj = simulate(sol, 0.0, x0, y0);
      const FundamentalPath fp = fundamental(sol, traj.t);
      double a = 0.0, b = 0.0, c = 0.0;
      for (std::size_t i = 0; i < traj.t.size(); ++i) {
        a = std::max(a, traj.x[i].norm() / fp.phi[i].norm());
        b = std::max(b, traj.y[i].norm());
        c = std::max(c, traj.xi[i].norm());
      }
      xr.push_back(a);
      ym.push_back(b);
      xim.push_back(c);
    }
    os << "max |X|/|Phi| " << fmt(xr.back()) << " (limit " << fmt(extrapolated_sup(xr)) << ") max |Y| "
       << fmt(ym.back()) << " (limit " << fmt(extrapolated_sup(ym)) << ") max |xi| " << fmt(xim.back())
       << " (limit " << fmt(extrapolated_sup(xim)) << ")";
    return bounded_along_ladder(xr, 0.1) && bounded_along_ladder(ym, 0.1) && bounded_along_ladder(xim, 0.1);
  });

  if (options.solution_file) {
    family("solution_file", [&](std::ostream& os) {
      const SolutionTable table = load_checked_solution(*options.solution_file, params.d);
      os << table.t.size() << " rows";
      return true;
    });
  }

  json j;
  j["n0"] = threshold;
  j["T0"] = layer;
  j["ladder"] = levels;
  j["families"] = json::array();
  bool all = true;
  for (const auto& r : results) {
    all = all && r.pass;
    j["families"].push_back({{"family", r.family}, {"verdict", r.pass ? "pass" : "fail"}, {"detail", r.detail}});
  }
  j["pass"] = all;
  write_file((fs::path(out_dir) / "verify.json").string(), j.dump(2) + "\n");
  return results;
}

}  // namespace multiexec
