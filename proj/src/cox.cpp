// Negative log partial likelihood for the proportional hazards model with
// Breslow's handling of tied event times. Every event at time t shares the
// risk set {j : t_j >= t}, so the loss is independent of the baseline hazard.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dlsa/linalg.hpp"
#include "glm_internal.hpp"

namespace dlsa::detail {

Evaluation evaluate_cox(const ParamVector& theta, const DataPartition& data, Order order) {
  const auto& x = data.covariates();
  const auto& time = data.response();
  const auto& event = data.event();
  const auto n = data.rows();
  const auto p = data.cols();

  const Eigen::VectorXd eta = x * theta.coefficients;
  // exp(η - max η) keeps the risk-set sums finite; the shift cancels in the
  // ratios and is added back in log S0.
  const double shift = eta.maxCoeff();
  const Eigen::VectorXd risk = (eta.array() - shift).exp();

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return time(a) > time(b); });

  const bool want_grad = order >= Order::gradient;
  const bool want_hess = order == Order::hessian;

  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(want_grad ? p : 0);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(want_hess ? p : 0, want_hess ? p : 0);

  double total = 0.0;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(want_grad ? p : 0);
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(want_hess ? p : 0, want_hess ? p : 0);

  std::size_t start = 0;
  while (start < idx.size()) {
    std::size_t stop = start;
    const double t = time(idx[start]);
    while (stop < idx.size() && time(idx[stop]) == t) ++stop;

    // Whole tie group joins the risk set before any of its events is scored.
    double deaths = 0.0;
    Eigen::VectorXd event_x_sum = Eigen::VectorXd::Zero(want_grad ? p : 0);
    for (std::size_t k = start; k < stop; ++k) {
      const auto i = idx[k];
      const double r = risk(i);
      s0 += r;
      if (want_grad) s1.noalias() += r * x.row(i).transpose();
      if (want_hess) s2.noalias() += r * x.row(i).transpose() * x.row(i);
      if (event(i) == 1.0) {
        deaths += 1.0;
        total += eta(i) - shift;
        if (want_grad) event_x_sum.noalias() += x.row(i).transpose();
      }
    }
    if (deaths > 0.0) {
      total -= deaths * std::log(s0);
      if (want_grad) {
        const Eigen::VectorXd xbar = s1 / s0;
        grad.noalias() += event_x_sum - deaths * xbar;
        if (want_hess) hess.noalias() += deaths * (s2 / s0 - xbar * xbar.transpose());
      }
    }
    start = stop;
  }

  const double nd = static_cast<double>(n);
  Evaluation out;
  out.value = -total / nd;
  if (want_grad) out.gradient = -grad / nd;
  if (want_hess) out.hessian = linalg::symmetrize(hess / nd);
  return out;
}

}  // namespace dlsa::detail
