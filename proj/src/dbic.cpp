#include <cmath>
#include <limits>
#include <string>

#include "dlsa/errors.hpp"
#include "dlsa/shrinkage.hpp"

namespace dlsa {

double dbic_value(const Eigen::MatrixXd& precision, const Eigen::VectorXd& theta_tilde,
                  const Eigen::VectorXd& theta, std::uint64_t total_n) {
  if (total_n == 0) throw InputError("DBIC needs a positive sample size");
  const Eigen::VectorXd diff = theta - theta_tilde;
  const double n = static_cast<double>(total_n);
  const auto df = static_cast<double>((theta.array() != 0.0).count());
  return diff.dot(precision * diff) + std::log(n) * df / n;
}

SelectionResult dbic(const LassoPath& path, const CombinedFit& fit) {
  return dbic(path, fit.precision, fit.theta_tilde.stacked(), fit.total_n);
}

SelectionResult dbic(const LassoPath& path, const Eigen::MatrixXd& precision,
                     const Eigen::VectorXd& theta_tilde, std::uint64_t total_n) {
  if (path.knots.empty()) throw InputError("empty path");
  if (precision.rows() != theta_tilde.size()) throw DimensionMismatch("precision vs theta");
  SelectionResult result;
  result.dbic_values.reserve(path.knots.size());
  result.dbic_min = std::numeric_limits<double>::infinity();
  // Knots run from large to small λ₀; a strict comparison keeps the sparser
  // model on ties.
  for (std::size_t i = 0; i < path.knots.size(); ++i) {
    const auto& theta = path.coefficients[i];
    if (theta.size() != theta_tilde.size()) throw DimensionMismatch("path vs theta");
    const double value = dbic_value(precision, theta_tilde, theta, total_n);
    result.dbic_values.push_back(value);
    if (value < result.dbic_min) {
      result.dbic_min = value;
      result.chosen_knot = i;
    }
  }
  result.chosen_lambda0 = path.knots[result.chosen_knot];
  result.theta_selected = path.coefficients[result.chosen_knot];
  result.support = path.active_sets[result.chosen_knot];
  return result;
}

Eigen::VectorXd refit_on_support(const CombinedFit& fit, std::span<const Eigen::Index> support) {
  return refit_on_support(fit.precision, fit.theta_tilde.stacked(), support);
}

Eigen::VectorXd refit_on_support(const Eigen::MatrixXd& precision,
                                 const Eigen::VectorXd& theta_tilde,
                                 std::span<const Eigen::Index> support) {
  const auto q = theta_tilde.size();
  if (support.empty()) throw InputError("refit needs a nonempty support");
  std::vector<bool> in(static_cast<std::size_t>(q), false);
  for (auto j : support) {
    if (j < 0 || j >= q) throw InputError("support index " + std::to_string(j) + " out of range");
    in[j] = true;
  }
  std::vector<Eigen::Index> on, off;
  for (Eigen::Index j = 0; j < q; ++j) (in[j] ? on : off).push_back(j);

  const auto s = static_cast<Eigen::Index>(on.size());
  Eigen::MatrixXd block(s, s);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s);
  for (Eigen::Index a = 0; a < s; ++a) {
    for (Eigen::Index b = 0; b < s; ++b) block(a, b) = precision(on[a], on[b]);
    // Ω₁₁ θ̃⁽ᴹ⁾ + Ω₁₂ θ̃⁽⁻ᴹ⁾ = (Ω θ̃) restricted to the support.
    for (Eigen::Index j = 0; j < q; ++j) rhs(a) += precision(on[a], j) * theta_tilde(j);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(block);
  if (llt.info() != Eigen::Success) throw NonPositiveDefinite("on-support precision block is singular");
  const Eigen::VectorXd solved = llt.solve(rhs);

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(q);
  for (Eigen::Index a = 0; a < s; ++a) theta(on[a]) = solved(a);
  return theta;
}

}  // namespace dlsa
