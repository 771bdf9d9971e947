#include "multiexec/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace multiexec {

MatrixXd symmetrize(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

double symmetry_defect(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

VectorXd sym_eigenvalues(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double min_eigenvalue(const MatrixXd& m) { return sym_eigenvalues(m).minCoeff(); }

double max_eigenvalue(const MatrixXd& m) { return sym_eigenvalues(m).maxCoeff(); }

double op_norm(const MatrixXd& m) { return sym_eigenvalues(m).cwiseAbs().maxCoeff(); }

MatrixXd sym_sqrt(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(m));
  VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

MatrixXd sym_inv_sqrt(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(m));
  VectorXd ev = es.eigenvalues().cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace multiexec
