#include "dlsa/linalg.hpp"

#include <cmath>
#include <string>

#include "dlsa/diagnostics.hpp"
#include "dlsa/errors.hpp"

namespace dlsa::linalg {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) {
  Eigen::MatrixXd s(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  return s;
}

bool is_positive_definite(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() == 0) return false;
  if (!a.allFinite()) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) return false;
  return (llt.matrixL().toDenseMatrix().diagonal().array() > 0.0).all();
}

SpdSolve spd_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const auto q = a.rows();
  if (a.cols() != q || b.rows() != q) {
    throw DimensionMismatch("spd_solve: incompatible shapes");
  }
  if (!a.allFinite()) throw NonPositiveDefinite("matrix has non-finite entries");
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NonPositiveDefinite("Cholesky factorization failed");
  }
  const Eigen::VectorXd pivots = llt.matrixL().toDenseMatrix().diagonal().array().square();
  const double threshold = 1e-12 * a.trace() / static_cast<double>(q);
  if (pivots.minCoeff() >= threshold) {
    return {llt.solve(b), false};
  }

  warn("near-singular precision (min pivot " + std::to_string(pivots.minCoeff()) +
       "); using eigen pseudo-solve");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double cutoff = 1e-12 * values.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(q);
  for (Eigen::Index i = 0; i < q; ++i) {
    if (values(i) > cutoff) inv(i) = 1.0 / values(i);
  }
  const Eigen::MatrixXd& v = eig.eigenvectors();
  return {v * inv.asDiagonal() * v.transpose() * b, true};
}

Eigen::VectorXd cholesky_solve_or_throw(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success || !a.allFinite()) {
    throw SingularHessian("Hessian is not positive definite");
  }
  const Eigen::VectorXd pivots = llt.matrixL().toDenseMatrix().diagonal().array().square();
  if (pivots.minCoeff() <= 1e-14 * a.diagonal().cwiseAbs().maxCoeff()) {
    throw SingularHessian("Hessian is numerically singular");
  }
  return llt.solve(b);
}

}  // namespace dlsa::linalg
