#include "multiexec/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace multiexec {

namespace {

double psd_tolerance(const MatrixXd& m) { return 1e-10 * (1.0 + frobenius(m)); }

void require_gamma_dim(const BlockSym& q, const VectorXd& gamma) {
  const auto d = q.a.rows();
  if (q.a.cols() != d || q.b.rows() != d || q.b.cols() != d || q.c.rows() != d ||
      q.c.cols() != d || gamma.size() != d) {
    throw PreconditionError("block dimension mismatch");
  }
}

}  // namespace

double ModelParams::lambda_min() const { return min_eigenvalue(lambda); }
double ModelParams::lambda_max() const { return max_eigenvalue(lambda); }
MatrixXd ModelParams::lambda_inverse() const { return symmetrize(lambda.inverse()); }

double ModelParams::rho_sup() const {
  double s = 0.0;
  for (const auto& p : rho.pieces()) s = std::max(s, p.value.maxCoeff());
  return s;
}

double ModelParams::rho_sup(int i) const {
  double s = 0.0;
  for (const auto& p : rho.pieces()) s = std::max(s, p.value(i));
  return s;
}

double ModelParams::sigma_sup() const {
  double s = 0.0;
  for (const auto& p : sigma.pieces()) s = std::max(s, frobenius(p.value));
  return s;
}

std::vector<double> ModelParams::breakpoints() const {
  std::vector<double> out;
  for (double t : rho.breakpoints())
    if (t > 0.0 && t < horizon) out.push_back(t);
  for (double t : sigma.breakpoints())
    if (t > 0.0 && t < horizon) out.push_back(t);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ModelParams make_constant_params(const MatrixXd& lambda, const VectorXd& gamma,
                                 const VectorXd& rho, const MatrixXd& sigma, double horizon) {
  ModelParams p;
  p.d = static_cast<int>(gamma.size());
  p.lambda = lambda;
  p.gamma = gamma;
  p.rho = VectorSchedule::constant(rho);
  p.sigma = MatrixSchedule::constant(sigma);
  p.horizon = horizon;
  return p;
}

std::vector<Violation> validate(const ModelParams& p) {
  std::vector<Violation> out;
  auto add = [&](std::string field, std::string msg) {
    out.push_back({std::move(field), std::move(msg)});
  };
  if (p.d < 1) {
    add("d", "d must be a positive integer");
    return out;
  }
  if (!(p.horizon > 0.0) || !std::isfinite(p.horizon)) add("T", "horizon must be positive and finite");

  if (p.lambda.rows() != p.d || p.lambda.cols() != p.d) {
    add("lambda", "lambda must be d x d");
  } else if (!p.lambda.allFinite()) {
    add("lambda", "lambda has non-finite entries");
  } else {
    if (symmetry_defect(p.lambda) > psd_tolerance(p.lambda)) add("lambda", "lambda not symmetric");
    if (!(min_eigenvalue(p.lambda) > 0.0)) add("lambda", "lambda not positive definite");
  }

  if (p.gamma.size() != p.d) {
    add("gamma", "gamma must have d entries");
  } else {
    for (int i = 0; i < p.d; ++i) {
      if (!(p.gamma(i) > 0.0) || !std::isfinite(p.gamma(i))) {
        std::ostringstream os;
        os << "gamma entry not > 0 (index " << i << ")";
        add("gamma", os.str());
      }
    }
  }

  auto check_times = [&](const char* name, const std::vector<double>& starts) {
    if (starts.empty()) {
      add(name, "schedule has no pieces");
      return;
    }
    if (starts.front() != 0.0) add(name, "first piece must start at t = 0");
    for (std::size_t k = 1; k < starts.size(); ++k) {
      if (!(starts[k] > starts[k - 1])) add(name, "piece start times must be strictly increasing");
      if (p.horizon > 0.0 && !(starts[k] < p.horizon)) add(name, "piece starts at or after T");
    }
  };

  std::vector<double> rho_starts;
  for (const auto& piece : p.rho.pieces()) {
    rho_starts.push_back(piece.t_start);
    if (piece.value.size() != p.d) {
      add("rho", "rho piece must have d diagonal entries");
    } else if (!piece.value.allFinite() || (piece.value.array() < 0.0).any()) {
      add("rho", "rho entry not >= 0");
    }
  }
  check_times("rho", rho_starts);

  std::vector<double> sigma_starts;
  for (const auto& piece : p.sigma.pieces()) {
    sigma_starts.push_back(piece.t_start);
    const MatrixXd& s = piece.value;
    if (s.rows() != p.d || s.cols() != p.d) {
      add("sigma", "sigma piece must be d x d");
      continue;
    }
    if (!s.allFinite()) {
      add("sigma", "sigma has non-finite entries");
      continue;
    }
    const double tol = psd_tolerance(s);
    if (symmetry_defect(s) > tol) add("sigma", "sigma not symmetric");
    if (min_eigenvalue(s) < -tol) add("sigma", "sigma not positive semidefinite");
  }
  check_times("sigma", sigma_starts);
  return out;
}

void require_valid(const ModelParams& params) {
  const auto v = validate(params);
  if (v.empty()) return;
  std::ostringstream os;
  os << "invalid model parameters:";
  for (const auto& x : v) os << "\n  " << x.field << ": " << x.message;
  throw ConfigError(os.str());
}

MatrixXd BlockSym::assemble() const {
  const auto d = a.rows();
  MatrixXd m(2 * d, 2 * d);
  m.topLeftCorner(d, d) = a;
  m.topRightCorner(d, d) = b;
  m.bottomLeftCorner(d, d) = b.transpose();
  m.bottomRightCorner(d, d) = c;
  return m;
}

BlockSym BlockSym::from_full(const MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0)
    throw PreconditionError("BlockSym::from_full needs a square matrix of even size");
  const auto d = m.rows() / 2;
  const MatrixXd s = symmetrize(m);
  return {s.topLeftCorner(d, d), s.topRightCorner(d, d), s.bottomRightCorner(d, d)};
}

BlockSym BlockSym::zero(int d) {
  return {MatrixXd::Zero(d, d), MatrixXd::Zero(d, d), MatrixXd::Zero(d, d)};
}

double BlockSym::quadratic_form(const VectorXd& u, const VectorXd& v) const {
  return u.dot(a * u) + 2.0 * u.dot(b * v) + v.dot(c * v);
}

BlockSym& BlockSym::operator+=(const BlockSym& o) {
  a += o.a;
  b += o.b;
  c += o.c;
  return *this;
}

BlockSym& BlockSym::operator-=(const BlockSym& o) {
  a -= o.a;
  b -= o.b;
  c -= o.c;
  return *this;
}

DerivedBlocks def_blocks(const BlockSym& q, const VectorXd& gamma) {
  require_gamma_dim(q, gamma);
  const auto g = gamma.asDiagonal();
  DerivedBlocks out;
  out.d = q.a - g * q.b.transpose();
  out.e = g * q.c - q.b;
  out.f = out.d + out.e * g;
  return out;
}

BlockSym p_from_q(const BlockSym& q, const VectorXd& gamma) {
  require_gamma_dim(q, gamma);
  BlockSym p = q;
  p.c.diagonal() -= gamma.cwiseInverse();
  return p;
}

BlockSym q_from_p(const BlockSym& p, const VectorXd& gamma) {
  require_gamma_dim(p, gamma);
  BlockSym q = p;
  q.c.diagonal() += gamma.cwiseInverse();
  return q;
}

}  // namespace multiexec
