#include "multiexec/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "multiexec/bounds.hpp"
#include "multiexec/io.hpp"

namespace multiexec {

GridSpec default_grid(const ModelParams& params) {
  return GridSpec{0.0, params.horizon, 2000, 8.0};
}

std::vector<double> make_grid(const GridSpec& spec) {
  if (!(spec.t_start < spec.t_end)) throw PreconditionError("grid: t_start must be < t_end");
  if (spec.base_steps < 1) throw PreconditionError("grid: base_steps must be >= 1");
  if (!(spec.refinement >= 1.0)) throw PreconditionError("grid: refinement must be >= 1");
  const int n = spec.base_steps;
  const double length = spec.t_end - spec.t_start;
  std::vector<double> t(static_cast<std::size_t>(n) + 1);
  t.front() = spec.t_start;
  if (spec.refinement == 1.0 || n == 1) {
    for (int k = 1; k < n; ++k) t[k] = spec.t_start + length * k / n;
  } else {
    const double q = std::pow(spec.refinement, -1.0 / (n - 1));
    const double h0 = length * (1.0 - q) / (1.0 - std::pow(q, n));
    for (int k = 1; k < n; ++k) t[k] = spec.t_start + h0 * (1.0 - std::pow(q, k)) / (1.0 - q);
  }
  t.back() = spec.t_end;
  return t;
}

std::vector<double> merge_nodes(std::vector<double> grid, const std::vector<double>& extra) {
  if (grid.empty()) return grid;
  const double lo = grid.front(), hi = grid.back();
  for (double t : extra)
    if (t >= lo && t <= hi) grid.push_back(t);
  std::sort(grid.begin(), grid.end());
  // drop exact duplicates and points that would create degenerate intervals
  std::vector<double> out;
  out.reserve(grid.size());
  const double min_gap = 1e-13 * std::max(1.0, std::abs(hi));
  for (double t : grid) {
    if (!out.empty() && t - out.back() <= min_gap) {
      // keep exact extra points (breakpoints, t_max) over nearby grid points
      if (std::find(extra.begin(), extra.end(), t) != extra.end()) out.back() = t;
      continue;
    }
    out.push_back(t);
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

RiccatiCoefficients riccati_coefficients(const ModelParams& params, double t) {
  const int d = params.d;
  MatrixXd j(2 * d, d);
  j.topRows(d) = -MatrixXd::Identity(d, d);
  j.bottomRows(d) = params.gamma_matrix();
  RiccatiCoefficients c;
  c.r = symmetrize(j * params.lambda_inverse() * j.transpose());
  const VectorXd& rho = params.rho.at(t);
  c.s = MatrixXd::Zero(2 * d, 2 * d);
  c.s.bottomRightCorner(d, d).diagonal() = -rho;
  c.source = MatrixXd::Zero(2 * d, 2 * d);
  c.source.topLeftCorner(d, d) = params.sigma.at(t);
  c.source.bottomRightCorner(d, d).diagonal() = 2.0 * rho.cwiseQuotient(params.gamma);
  return c;
}

MatrixXd riccati_rhs(const MatrixXd& q, const RiccatiCoefficients& coef) {
  return q * coef.r * q - q * coef.s - coef.s * q - coef.source;
}

BlockSym rhs(double t, const BlockSym& q, const ModelParams& params) {
  if (q.dim() != params.d) throw PreconditionError("rhs: dimension mismatch");
  return BlockSym::from_full(riccati_rhs(q.assemble(), riccati_coefficients(params, t)));
}

BlockSym terminal_condition(double n, const ModelParams& params) {
  if (!(n >= params.gamma_max())) {
    std::ostringstream os;
    os << "penalty n = " << n << " is below gamma_max = " << params.gamma_max()
       << "; the terminal condition would not be positive semidefinite";
    throw PreconditionError(os.str());
  }
  const int d = params.d;
  return {n * MatrixXd::Identity(d, d), MatrixXd::Identity(d, d),
          MatrixXd(params.gamma.cwiseInverse().asDiagonal())};
}

RiccatiSolution::RiccatiSolution(ModelParams params, double n, bool limit, std::vector<double> grid,
                                 std::vector<MatrixXd> values, std::vector<double> nodes,
                                 RiccatiDiagnostics diagnostics)
    : params_(std::move(params)),
      n_(n),
      limit_(limit),
      grid_(std::move(grid)),
      values_(std::move(values)),
      nodes_(std::move(nodes)),
      diagnostics_(std::move(diagnostics)) {
  if (grid_.empty() || grid_.size() != values_.size())
    throw PreconditionError("RiccatiSolution: grid and values must be non-empty and equal length");
  compute_slopes();
}

void RiccatiSolution::compute_slopes() {
  const std::size_t m = grid_.size();
  slope_lo_.assign(m > 0 ? m - 1 : 0, MatrixXd());
  slope_hi_.assign(m > 0 ? m - 1 : 0, MatrixXd());
  for (std::size_t k = 0; k + 1 < m; ++k) {
    const auto coef = riccati_coefficients(params_, 0.5 * (grid_[k] + grid_[k + 1]));
    slope_lo_[k] = riccati_rhs(values_[k], coef);
    slope_hi_[k] = riccati_rhs(values_[k + 1], coef);
  }
}

MatrixXd RiccatiSolution::eval_full(double t) const {
  if (!(t >= grid_.front() && t <= grid_.back())) {
    std::ostringstream os;
    os << "eval: t = " << t << " outside [" << grid_.front() << ", " << grid_.back() << "]";
    throw PreconditionError(os.str());
  }
  auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
  if (it == grid_.end()) return values_.back();
  const std::size_t k = static_cast<std::size_t>(it - grid_.begin()) - 1;
  if (grid_[k] == t) return values_[k];
  const double h = grid_[k + 1] - grid_[k];
  const double s = (t - grid_[k]) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2,
               h11 = s3 - s2;
  MatrixXd q = h00 * values_[k] + (h10 * h) * slope_lo_[k] + h01 * values_[k + 1] +
               (h11 * h) * slope_hi_[k];
  return symmetrize(q);
}

RiccatiSolution RiccatiSolution::restricted(double t_max) const {
  if (!(t_max >= grid_.front() && t_max <= grid_.back()))
    throw PreconditionError("restricted: t_max outside the solution range");
  std::vector<double> g;
  std::vector<MatrixXd> v;
  for (std::size_t k = 0; k < grid_.size() && grid_[k] <= t_max; ++k) {
    g.push_back(grid_[k]);
    v.push_back(values_[k]);
  }
  if (g.back() < t_max) {
    g.push_back(t_max);
    v.push_back(eval_full(t_max));
  }
  std::vector<double> nodes;
  for (double t : nodes_)
    if (t <= t_max) nodes.push_back(t);
  if (nodes.empty() || nodes.back() < t_max) nodes.push_back(t_max);
  RiccatiSolution out(params_, n_, limit_, std::move(g), std::move(v), std::move(nodes), diagnostics_);
  return out;
}

namespace {

void record_definiteness(const ModelParams& params, const std::vector<double>& grid,
                         const std::vector<MatrixXd>& values, double psd_tol, RiccatiDiagnostics& diag) {
  diag.min_eigenvalue = std::numeric_limits<double>::infinity();
  diag.min_relative_eigenvalue = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double ev = min_eigenvalue(values[k]);
    const double rel = ev / (1.0 + frobenius(values[k]));
    if (ev < diag.min_eigenvalue) {
      diag.min_eigenvalue = ev;
      diag.min_eigenvalue_time = grid[k];
    }
    if (rel < diag.min_relative_eigenvalue) diag.min_relative_eigenvalue = rel;
    if (rel < -psd_tol) {
      std::ostringstream os;
      os << "Riccati solution lost positive semidefiniteness: min eigenvalue " << ev << " at t = "
         << grid[k] << " (d = " << params.d << ")";
      throw NumericError(os.str(), grid[k]);
    }
  }
}

}  // namespace

RiccatiSolution solve_penalized(const ModelParams& params, double n, const GridSpec& grid,
                                const SolverOptions& options) {
  return solve_penalized(params, n, make_grid(grid), options);
}

RiccatiSolution solve_penalized(const ModelParams& params, double n, std::vector<double> nodes,
                                const SolverOptions& options) {
  require_valid(params);
  const BlockSym terminal = terminal_condition(n, params);
  if (nodes.size() < 2) throw PreconditionError("solve_penalized: grid needs at least two points");
  if (std::abs(nodes.back() - params.horizon) > 1e-12 * std::max(1.0, params.horizon))
    throw PreconditionError("solve_penalized: grid must end at the horizon T");
  nodes.back() = params.horizon;
  if (nodes.front() < 0.0) throw PreconditionError("solve_penalized: grid must start at t >= 0");
  nodes = merge_nodes(std::move(nodes), params.breakpoints());

  const int m = 2 * params.d;
  std::vector<double> times{params.horizon};
  std::vector<MatrixXd> values{terminal.assemble()};
  RiccatiDiagnostics diag;

  VectorXd y = Eigen::Map<const VectorXd>(values.back().data(), m * m);
  DormandPrince stepper(options.ode);
  auto project = [&](VectorXd& state) {
    Eigen::Map<MatrixXd> q(state.data(), m, m);
    diag.max_symmetry_defect =
        std::max(diag.max_symmetry_defect, symmetry_defect(q) / (1.0 + frobenius(q)));
    q = symmetrize(q).eval();
  };
  auto observe = [&](double t, const VectorXd& state) {
    times.push_back(t);
    values.emplace_back(Eigen::Map<const MatrixXd>(state.data(), m, m));
  };

  for (std::size_t k = nodes.size() - 1; k > 0; --k) {
    const double hi = nodes[k], lo = nodes[k - 1];
    const RiccatiCoefficients coef = riccati_coefficients(params, 0.5 * (lo + hi));
    const OdeRhs f = [&coef, m](double, const VectorXd& state, VectorXd& out) {
      Eigen::Map<const MatrixXd> q(state.data(), m, m);
      out.resize(m * m);
      Eigen::Map<MatrixXd>(out.data(), m, m) = riccati_rhs(q, coef);
    };
    const OdeStats s = stepper.integrate(f, hi, lo, y, observe, project);
    diag.steps += s.accepted;
    diag.rejected += s.rejected;
    times.back() = lo;  // land exactly on the node
  }

  std::reverse(times.begin(), times.end());
  std::reverse(values.begin(), values.end());
  values.back() = terminal.assemble();
  record_definiteness(params, times, values, options.psd_tol, diag);
  return RiccatiSolution(params, n, false, std::move(times), std::move(values), std::move(nodes),
                         std::move(diag));
}

std::vector<double> default_ladder(double n0, int rungs) {
  std::vector<double> out;
  double n = n0;
  for (int k = 1; k <= rungs; ++k) {
    n *= 2.0;
    out.push_back(n);
  }
  return out;
}

LadderResult solve_ladder(const ModelParams& params, double t_max, const std::vector<double>& ladder,
                          double tol, const GridSpec& grid, const SolverOptions& options,
                          bool keep_rungs) {
  if (ladder.empty()) throw PreconditionError("ladder must not be empty");
  for (std::size_t k = 1; k < ladder.size(); ++k)
    if (!(ladder[k] > ladder[k - 1])) throw PreconditionError("ladder must be strictly increasing");
  if (!(t_max < params.horizon) || !(t_max >= grid.t_start))
    throw PreconditionError("limit solution needs grid.t_start <= t_max < T");
  const double threshold = n0(params);
  if (!(ladder.front() > threshold)) {
    std::ostringstream os;
    os << "ladder entry n = " << ladder.front() << " must exceed n0 = " << threshold;
    throw PreconditionError(os.str());
  }

  const std::vector<double> nodes = merge_nodes(make_grid(grid), {t_max});
  std::vector<std::size_t> compare;  // node indices with t <= t_max
  for (std::size_t k = 0; k < nodes.size() && nodes[k] <= t_max; ++k) compare.push_back(k);

  std::vector<RiccatiSolution> rungs;
  std::vector<double> history;
  double mono_margin = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::optional<RiccatiSolution> prev;
  std::optional<RiccatiSolution> chosen;
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    RiccatiSolution cur = solve_penalized(params, ladder[k], nodes, options);
    if (prev) {
      double change = 0.0;
      for (std::size_t idx : compare) {
        const double t = nodes[idx];
        const MatrixXd qk = cur.eval_full(t);
        const MatrixXd diff = qk - prev->eval_full(t);
        const double scale = 1.0 + frobenius(qk);
        change = std::max(change, frobenius(diff) / scale);
        const double mono = min_eigenvalue(diff) / scale;
        mono_margin = std::min(mono_margin, mono);
        if (mono < -options.monotonicity_tol) {
          std::ostringstream os;
          os << "penalization ladder not monotone between n = " << ladder[k - 1] << " and n = "
             << ladder[k] << " at t = " << t << " (relative margin " << mono << ")";
          throw NumericError(os.str(), t);
        }
      }
      history.push_back(change);
      if (change < tol) {
        converged = true;
        chosen = cur;
      }
    }
    if (keep_rungs) rungs.push_back(cur);
    if (converged) break;
    prev = std::move(cur);
  }
  if (!chosen) chosen = std::move(prev);

  RiccatiSolution top = *chosen;
  auto fill = [&](RiccatiDiagnostics& d) {
    d.ladder = ladder;
    d.convergence_history = history;
    d.converged = converged;
    d.monotonicity_margin = std::isfinite(mono_margin) ? mono_margin : 0.0;
  };
  fill(top.diagnostics());
  RiccatiSolution restricted = top.restricted(t_max);
  RiccatiSolution limit(params, top.n(), true, restricted.grid(),
                        [&] {
                          std::vector<MatrixXd> v;
                          for (std::size_t k = 0; k < restricted.size(); ++k) v.push_back(restricted.full(k));
                          return v;
                        }(),
                        restricted.nodes(), top.diagnostics());
  return LadderResult{std::move(limit), std::move(top), std::move(rungs)};
}

RiccatiSolution solve_limit(const ModelParams& params, double t_max, const std::vector<double>& ladder,
                            double tol, const GridSpec& grid, const SolverOptions& options) {
  return solve_ladder(params, t_max, ladder, tol, grid, options, false).limit;
}

std::vector<std::string> solution_columns(int d) {
  std::vector<std::string> cols{"t"};
  const int m = 2 * d;
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      std::string block;
      int r = i, c = j;
      if (i < d && j < d) {
        block = "A";
      } else if (i < d) {
        block = "B";
        c -= d;
      } else {
        block = "C";
        r -= d;
        c -= d;
      }
      cols.push_back(block + "_" + std::to_string(r + 1) + std::to_string(c + 1));
    }
  }
  return cols;
}

void write_solution_csv(const RiccatiSolution& solution, std::ostream& out) {
  write_csv_row(out, solution_columns(solution.params().d));
  const int m = 2 * solution.params().d;
  std::vector<double> row;
  for (double t : solution.nodes()) {
    const MatrixXd q = solution.eval_full(t);
    row.assign(1, t);
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) row.push_back(q(i, j));
    write_csv_row(out, row);
  }
}

SolutionTable read_solution_csv(std::istream& in, int d) {
  const auto expected = solution_columns(d);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("solution file: empty");
  if (split_csv_line(line) != expected) throw ConfigError("solution file: unexpected header");
  SolutionTable table;
  table.d = d;
  const int m = 2 * d;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != expected.size()) {
      std::ostringstream os;
      os << "solution file: row " << row_no << " has " << cells.size() << " columns, expected "
         << expected.size();
      throw ConfigError(os.str());
    }
    std::vector<double> v(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      char* end = nullptr;
      v[i] = std::strtod(cells[i].c_str(), &end);
      if (end == cells[i].c_str() || *end != '\0' || !std::isfinite(v[i])) {
        std::ostringstream os;
        os << "solution file: bad number '" << cells[i] << "' in row " << row_no;
        throw ConfigError(os.str());
      }
    }
    if (!table.t.empty() && !(v[0] > table.t.back()))
      throw ConfigError("solution file: time column not strictly increasing");
    MatrixXd q(m, m);
    std::size_t c = 1;
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        q(i, j) = v[c];
        q(j, i) = v[c];
        ++c;
      }
    table.t.push_back(v[0]);
    table.values.push_back(BlockSym::from_full(q));
  }
  if (table.t.empty()) throw ConfigError("solution file: no data rows");
  return table;
}

}  // namespace multiexec
