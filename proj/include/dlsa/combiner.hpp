#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "dlsa/glm.hpp"

namespace dlsa {

/// Master-side result of the single communication round.
///
/// `precision` is Ω̂ = N⁻¹ Σ_k n_k Σ̂_k⁻¹ (the inverse of the combined
/// asymptotic covariance Σ̂), `covariance` its inverse.
struct CombinedFit {
  ModelFamily family = ModelFamily::linear();
  ParamVector theta_tilde;
  Eigen::MatrixXd precision;
  Eigen::MatrixXd covariance;
  std::uint64_t total_n = 0;
  std::uint64_t k = 0;
  /// Set when the aggregate precision was near-singular and the solve fell
  /// back to an eigen pseudo-inverse (a warning is emitted as well).
  bool pseudo_inverse_used = false;
};

/// Weighted least squares combination:
///   θ̃ = (Σ_k n_k Σ̂_k⁻¹)⁻¹ Σ_k n_k Σ̂_k⁻¹ θ̂_k.
/// Throws DimensionMismatch on inconsistent summaries and NonPositiveDefinite
/// when the aggregate precision fails Cholesky.
CombinedFit combine_wlse(std::span<const LocalSummary> summaries);

/// One-shot sample-size weighted average Σ_k (n_k / N) θ̂_k.
ParamVector combine_os(std::span<const LocalSummary> summaries);

/// One-step surrogate-likelihood estimator. Starts from the local estimate of
/// the first partition (the master shard), gathers the global gradient
/// Σ_k (n_k/N) ∇ℒ_k(θ̂_1) in one round and takes a Newton step with the
/// first partition's Hessian at θ̂_1. `summaries` and `partitions` must be in
/// the same order.
/// Partition gradients are evaluated on up to `threads` threads and reduced in
/// partition order.
ParamVector combine_csl(std::span<const LocalSummary> summaries,
                        std::span<const DataPartition> partitions, const ModelFamily& family,
                        unsigned threads = 1);

}  // namespace dlsa
