#pragma once

#include <Eigen/Dense>

namespace multiexec {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Frobenius norm, |B| = sqrt(sum b_ij^2).
inline double frobenius(const MatrixXd& m) { return m.norm(); }

MatrixXd symmetrize(const MatrixXd& m);

/// max |m - m^T|, entrywise.
double symmetry_defect(const MatrixXd& m);

/// Eigenvalues of the symmetric part of `m`, ascending.
VectorXd sym_eigenvalues(const MatrixXd& m);
double min_eigenvalue(const MatrixXd& m);
double max_eigenvalue(const MatrixXd& m);

/// Induced 2-norm of a symmetric matrix: largest |eigenvalue|.
double op_norm(const MatrixXd& m);

/// Principal square root of a symmetric PSD matrix (negative eigenvalues
/// are clamped to zero).
MatrixXd sym_sqrt(const MatrixXd& m);

/// (m)^{-1/2} for symmetric positive definite `m`.
MatrixXd sym_inv_sqrt(const MatrixXd& m);

}  // namespace multiexec
