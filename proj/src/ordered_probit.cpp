// Ordered probit: P(Y = l | x) = Φ(c_l - xᵀθ) - Φ(c_{l-1} - xᵀθ) with
// c_0 = -inf and c_L = +inf. Parameters are stacked as (θ, c_1..c_{L-1}).

#include <algorithm>
#include <cmath>
#include <limits>

#include "dlsa/linalg.hpp"
#include "glm_internal.hpp"

namespace dlsa::detail {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }
double normal_sf(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }

// Φ(upper) - Φ(lower), computed on whichever tail keeps precision.
double interval_probability(double upper, double lower) {
  double prob;
  if (lower > 0.0) {
    prob = normal_sf(lower) - normal_sf(upper);
  } else {
    prob = normal_cdf(upper) - normal_cdf(lower);
  }
  return std::max(prob, std::numeric_limits<double>::min());
}

}  // namespace

Evaluation evaluate_ordered_probit(const ModelFamily& family, const ParamVector& theta,
                                   const DataPartition& data, Order order) {
  const auto& x = data.covariates();
  const auto& y = data.response();
  const auto n = data.rows();
  const auto p = data.cols();
  const int ncut = family.num_cutpoints();
  const auto q = p + ncut;
  const auto& cut = theta.cutpoints;
  constexpr double inf = std::numeric_limits<double>::infinity();

  const bool want_grad = order >= Order::gradient;
  const bool want_hess = order == Order::hessian;

  double total = 0.0;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(want_grad ? q : 0);
  Eigen::VectorXd theta_weights = Eigen::VectorXd::Zero(want_hess ? n : 0);
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(want_hess ? p : 0, want_hess ? ncut : 0);
  Eigen::MatrixXd cut_block = Eigen::MatrixXd::Zero(want_hess ? ncut : 0, want_hess ? ncut : 0);

  for (Eigen::Index i = 0; i < n; ++i) {
    const double eta = clamp_link(x.row(i).dot(theta.coefficients));
    const int level = static_cast<int>(y(i));  // 1..L
    const int hi = level - 1;                  // index of c_l, valid when level <= L-1
    const int lo = level - 2;                  // index of c_{l-1}, valid when level >= 2
    const bool has_hi = level <= ncut;
    const bool has_lo = level >= 2;
    const double a = has_hi ? cut(hi) - eta : inf;
    const double b = has_lo ? cut(lo) - eta : -inf;

    const double prob = interval_probability(a, b);
    total += std::log(prob);
    if (!want_grad) continue;

    const double u = has_hi ? normal_pdf(a) / prob : 0.0;
    const double v = has_lo ? normal_pdf(b) / prob : 0.0;
    // Gradient of log P: θ-part -x(u - v), c_l-part u, c_{l-1}-part -v.
    grad.head(p).noalias() -= (u - v) * x.row(i).transpose();
    if (has_hi) grad(p + hi) += u;
    if (has_lo) grad(p + lo) -= v;
    if (!want_hess) continue;

    // Second derivatives of log P in (a, b); ∂a = ∂b = -x in θ.
    const double haa = has_hi ? -a * u - u * u : 0.0;
    const double hbb = has_lo ? b * v - v * v : 0.0;
    const double hab = u * v;
    theta_weights(i) = haa + hbb + 2.0 * hab;
    if (has_hi) {
      cross.col(hi).noalias() -= (haa + hab) * x.row(i).transpose();
      cut_block(hi, hi) += haa;
    }
    if (has_lo) {
      cross.col(lo).noalias() -= (hbb + hab) * x.row(i).transpose();
      cut_block(lo, lo) += hbb;
    }
    if (has_hi && has_lo) {
      cut_block(hi, lo) += hab;
      cut_block(lo, hi) += hab;
    }
  }

  const double nd = static_cast<double>(n);
  Evaluation out;
  out.value = -total / nd;
  if (want_grad) out.gradient = -grad / nd;
  if (want_hess) {
    Eigen::MatrixXd h(q, q);
    h.topLeftCorner(p, p) = weighted_gram(x, theta_weights);
    h.topRightCorner(p, ncut) = cross;
    h.bottomLeftCorner(ncut, p) = cross.transpose();
    h.bottomRightCorner(ncut, ncut) = cut_block;
    out.hessian = linalg::symmetrize(-h / nd);
  }
  return out;
}

}  // namespace dlsa::detail
