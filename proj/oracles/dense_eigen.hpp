#pragma once

// Full-spectrum dense eigensolvers used as references for the iterative principal eigenpairs.

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace perseg::oracle {

/// Smallest eigenvalue of a symmetric matrix.
double dense_symmetric_min(const Eigen::MatrixXd& A);

/// Smallest eigenvalue of A x = lambda diag(w) x, A symmetric, w > 0.
double dense_generalized_min(const Eigen::MatrixXd& A, const Eigen::VectorXd& w);

/// Eigenvalue with the smallest real part of a general real matrix.
double dense_min_real(const Eigen::MatrixXd& A);

inline Eigen::MatrixXd to_dense(const Eigen::SparseMatrix<double>& A) { return Eigen::MatrixXd(A); }

}  // namespace perseg::oracle
