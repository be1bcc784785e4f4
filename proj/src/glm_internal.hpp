#pragma once

#include <Eigen/Dense>

#include "dlsa/glm.hpp"

namespace dlsa::detail {

enum class Order { value, gradient, hessian };

struct Evaluation {
  double value = 0.0;
  Eigen::VectorXd gradient;  // filled when order >= gradient
  Eigen::MatrixXd hessian;   // filled when order == hessian
};

Evaluation evaluate(const ModelFamily& family, const ParamVector& theta, const DataPartition& data,
                    Order order);

Evaluation evaluate_cox(const ParamVector& theta, const DataPartition& data, Order order);
Evaluation evaluate_ordered_probit(const ModelFamily& family, const ParamVector& theta,
                                   const DataPartition& data, Order order);

inline double clamp_link(double eta) {
  return eta > kLinkClamp ? kLinkClamp : (eta < -kLinkClamp ? -kLinkClamp : eta);
}

/// Xᵀ diag(w) X.
Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& x, const Eigen::VectorXd& w);

}  // namespace dlsa::detail
