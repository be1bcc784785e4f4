#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dlsa/combiner.hpp"

namespace dlsa {

using IndexSet = std::vector<Eigen::Index>;

/// Exact piecewise-linear solution path of the adaptive Lasso on the master,
///
///   Q(θ) = (θ - θ̃)ᵀ Ω̂ (θ - θ̃) + λ₀ Σ_{j penalized} w_j |θ_j|,  w_j = 1/|θ̃_j|,
///
/// indexed by λ₀. All vectors are in the stacked parameter layout of the fit
/// (coefficients then cutpoints) and indices are 0-based.
struct LassoPath {
  /// Strictly decreasing; the first knot is λ_max (every penalized
  /// coefficient zero) and the last is 0.
  std::vector<double> knots;
  std::vector<Eigen::VectorXd> coefficients;
  /// Nonzero indices of the coefficients at each knot.
  std::vector<IndexSet> active_sets;
  std::vector<int> df;
  /// w_j for penalized coordinates, 0 for unpenalized ones, +inf for
  /// penalized coordinates whose θ̃_j is zero (pinned at zero).
  Eigen::VectorXd weights;
  IndexSet penalized;

  /// Path value at an arbitrary λ₀ ≥ 0 by linear interpolation between knots.
  Eigen::VectorXd coefficients_at(double lambda0) const;
};

struct SelectionResult {
  double chosen_lambda0 = 0.0;
  std::size_t chosen_knot = 0;
  Eigen::VectorXd theta_selected;
  IndexSet support;
  std::vector<double> dbic_values;  // one per knot
  double dbic_min = 0.0;
};

/// LARS with the lasso modification, run on the standardized problem
/// ‖ỹ - Ãβ‖² + λ₀‖β_P‖₁ where Ω̂ = LLᵀ, ỹ = Lᵀθ̃ and à = Lᵀ diag(1/w).
/// Unpenalized coordinates never leave the active set, so they are profiled
/// out exactly at every λ₀.
///
/// Throws NonPositiveDefinite if the precision is not PD and InputError when
/// `penalize` holds an out-of-range index.
LassoPath lasso_path(const CombinedFit& fit, std::span<const Eigen::Index> penalize);
LassoPath lasso_path(const Eigen::MatrixXd& precision, const Eigen::VectorXd& theta_tilde,
                     std::span<const Eigen::Index> penalize);

/// Every coefficient index of the fit except ordered-probit cutpoints.
IndexSet default_penalized(const CombinedFit& fit);

/// (θ - θ̃)ᵀ Ω̂ (θ - θ̃) + log N · df / N with df the nonzero count of θ.
double dbic_value(const Eigen::MatrixXd& precision, const Eigen::VectorXd& theta_tilde,
                  const Eigen::VectorXd& theta, std::uint64_t total_n);

/// DBIC minimized over the knots of the path. Within a segment df is fixed
/// and the quadratic term grows with λ₀, so each segment's infimum is attained
/// at its lower knot; knot evaluation is therefore exhaustive. Ties go to the
/// larger λ₀.
SelectionResult dbic(const LassoPath& path, const CombinedFit& fit);
SelectionResult dbic(const LassoPath& path, const Eigen::MatrixXd& precision,
                     const Eigen::VectorXd& theta_tilde, std::uint64_t total_n);

/// argmin (θ - θ̃)ᵀ Ω̂ (θ - θ̃) subject to θ_j = 0 off `support`.
/// Throws InputError on an empty support, NonPositiveDefinite when the
/// on-support block is singular.
Eigen::VectorXd refit_on_support(const CombinedFit& fit, std::span<const Eigen::Index> support);
Eigen::VectorXd refit_on_support(const Eigen::MatrixXd& precision,
                                 const Eigen::VectorXd& theta_tilde,
                                 std::span<const Eigen::Index> support);

/// Largest violation of the optimality conditions of Q at (λ₀, θ):
/// 2[Ω̂(θ - θ̃)]_j + λ₀ w_j sign(θ_j) = 0 on nonzero penalized coordinates,
/// |2[Ω̂(θ - θ̃)]_j| ≤ λ₀ w_j on zero ones and 2[Ω̂(θ - θ̃)]_j = 0 on
/// unpenalized ones. Pinned coordinates must be zero.
double kkt_violation(const Eigen::MatrixXd& precision, const Eigen::VectorXd& theta_tilde,
                     const LassoPath& path, double lambda0, const Eigen::VectorXd& theta);

}  // namespace dlsa
