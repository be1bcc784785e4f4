#pragma once

#include <Eigen/Dense>

namespace dlsa::linalg {

/// (A + Aᵀ) / 2, which is symmetric bit-for-bit.
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a);

/// True when a Cholesky factorization succeeds with every pivot > 0.
bool is_positive_definite(const Eigen::MatrixXd& a);

struct SpdSolve {
  Eigen::MatrixXd solution;
  bool pseudo_inverse_used = false;
};

/// Solves A X = B for symmetric A by Cholesky. If the factorization fails
/// outright, throws NonPositiveDefinite. If it succeeds but the smallest
/// pivot is below 1e-12 * trace(A) / q, falls back to a symmetric-eigen
/// pseudo-solve and emits a warning.
SpdSolve spd_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Plain Cholesky solve; throws SingularHessian when A is not numerically PD.
Eigen::VectorXd cholesky_solve_or_throw(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

}  // namespace dlsa::linalg
