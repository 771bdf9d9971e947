#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "multiexec/errors.hpp"
#include "multiexec/linalg.hpp"

namespace multiexec {

/// Piecewise-constant, right-continuous function of time. Piece k holds on
/// [pieces[k].t_start, pieces[k+1].t_start); the last piece extends to the
/// horizon. Times before the first piece map to the first piece.
template <class T>
class Schedule {
 public:
  struct Piece {
    double t_start;
    T value;
  };

  Schedule() = default;
  explicit Schedule(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {}

  static Schedule constant(T value) { return Schedule({Piece{0.0, std::move(value)}}); }

  const T& at(double t) const {
    if (pieces_.empty()) throw PreconditionError("schedule has no pieces");
    std::size_t k = 0;
    while (k + 1 < pieces_.size() && pieces_[k + 1].t_start <= t) ++k;
    return pieces_[k].value;
  }

  const std::vector<Piece>& pieces() const { return pieces_; }
  bool empty() const { return pieces_.empty(); }

  /// Interior discontinuity times (start of every piece but the first).
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (std::size_t k = 1; k < pieces_.size(); ++k) out.push_back(pieces_[k].t_start);
    return out;
  }

  template <class F>
  auto map(F&& f) const -> Schedule<decltype(f(std::declval<const T&>()))> {
    using U = decltype(f(std::declval<const T&>()));
    std::vector<typename Schedule<U>::Piece> out;
    out.reserve(pieces_.size());
    for (const auto& p : pieces_) out.push_back({p.t_start, f(p.value)});
    return Schedule<U>(std::move(out));
  }

 private:
  std::vector<Piece> pieces_;
};

using ScalarSchedule = Schedule<double>;
using VectorSchedule = Schedule<VectorXd>;
using MatrixSchedule = Schedule<MatrixXd>;

/// Market and cost coefficients of the liquidation problem.
///
/// gamma and rho are diagonal and are stored as their diagonals. Lambda and
/// gamma are constant in time; rho and sigma are piecewise constant on
/// [0, horizon].
struct ModelParams {
  int d = 0;
  MatrixXd lambda;      // instantaneous impact, SPD d x d
  VectorXd gamma;       // persistent impact, diagonal entries > 0
  VectorSchedule rho;   // resilience, diagonal entries >= 0
  MatrixSchedule sigma; // risk weight, symmetric PSD d x d
  double horizon = 0.0;

  double lambda_min() const;
  double lambda_max() const;
  double gamma_min() const { return gamma.minCoeff(); }
  double gamma_max() const { return gamma.maxCoeff(); }
  MatrixXd gamma_matrix() const { return gamma.asDiagonal(); }
  MatrixXd lambda_inverse() const;

  /// sup_t max_i rho_i(t); the operator norm of the diagonal rho.
  double rho_sup() const;
  /// sup_t rho_i(t) for one asset.
  double rho_sup(int i) const;
  /// sup_t |Sigma(t)| with |.| the Frobenius norm.
  double sigma_sup() const;

  /// Union of the rho and sigma breakpoints strictly inside (0, horizon).
  std::vector<double> breakpoints() const;
};

/// Builds params with constant rho and sigma schedules.
ModelParams make_constant_params(const MatrixXd& lambda, const VectorXd& gamma,
                                 const VectorXd& rho, const MatrixXd& sigma, double horizon);

struct Violation {
  std::string field;
  std::string message;
};

/// Every violated invariant of `params`; empty when valid.
std::vector<Violation> validate(const ModelParams& params);

/// Throws ConfigError listing all violations, if any.
void require_valid(const ModelParams& params);

/// Symmetric 2d x 2d matrix [[A, B], [B^T, C]] kept as its three blocks.
struct BlockSym {
  MatrixXd a;
  MatrixXd b;
  MatrixXd c;

  int dim() const { return static_cast<int>(a.rows()); }
  MatrixXd assemble() const;
  static BlockSym from_full(const MatrixXd& m);
  static BlockSym zero(int d);

  /// [u^T v^T] Q [u; v] evaluated blockwise.
  double quadratic_form(const VectorXd& u, const VectorXd& v) const;

  BlockSym& operator+=(const BlockSym& o);
  BlockSym& operator-=(const BlockSym& o);
  friend BlockSym operator+(BlockSym l, const BlockSym& r) { return l += r; }
  friend BlockSym operator-(BlockSym l, const BlockSym& r) { return l -= r; }
  friend BlockSym operator*(double s, BlockSym q) {
    q.a *= s;
    q.b *= s;
    q.c *= s;
    return q;
  }
};

/// D = A - gamma B^T, E = gamma C - B, F = D + E gamma.
struct DerivedBlocks {
  MatrixXd d;
  MatrixXd e;
  MatrixXd f;
};

DerivedBlocks def_blocks(const BlockSym& q, const VectorXd& gamma);

/// P = Q - [[0, 0], [0, gamma^{-1}]].
BlockSym p_from_q(const BlockSym& q, const VectorXd& gamma);
/// Q = P + [[0, 0], [0, gamma^{-1}]].
BlockSym q_from_p(const BlockSym& p, const VectorXd& gamma);

/// Position x and persistent price deviation y.
struct StateVec {
  VectorXd x;
  VectorXd y;
};

// Config documents (JSON): keys d, lambda, gamma, rho, sigma, T.
ModelParams parse_params(std::string_view json_text);
ModelParams load_params(const std::string& path);
std::string dump_params(const ModelParams& params);

}  // namespace multiexec
