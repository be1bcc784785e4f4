#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace dlsa {

enum class FamilyKind : std::uint16_t {
  linear = 0,
  logistic = 1,
  poisson = 2,
  cox = 3,
  ordered_probit = 4,
};

enum class TieMethod { breslow };

/// Loss family. Ordered-probit carries its number of cutpoints (L - 1) and
/// cox its tie handling; the other kinds carry neither.
class ModelFamily {
 public:
  static ModelFamily linear() { return ModelFamily(FamilyKind::linear, 0); }
  static ModelFamily logistic() { return ModelFamily(FamilyKind::logistic, 0); }
  static ModelFamily poisson() { return ModelFamily(FamilyKind::poisson, 0); }
  static ModelFamily cox(TieMethod ties = TieMethod::breslow);
  /// `num_levels` is L, the number of ordinal categories (L >= 2).
  static ModelFamily ordered_probit(int num_levels);

  /// Rebuilds a family from its wire tag; throws InputError on bad tags.
  static ModelFamily from_tag(std::uint16_t kind, std::uint16_t num_cutpoints);

  /// Parses "linear", "logistic", "poisson", "cox" or "ordered-probit".
  /// Ordered-probit needs `num_levels`.
  static ModelFamily parse(std::string_view name, int num_levels = 0);

  FamilyKind kind() const noexcept { return kind_; }
  int num_cutpoints() const noexcept { return num_cutpoints_; }
  int num_levels() const noexcept { return num_cutpoints_ + 1; }
  std::optional<TieMethod> tie_method() const noexcept;
  /// q = p (+ L - 1 for ordered-probit).
  Eigen::Index num_params(Eigen::Index p) const noexcept { return p + num_cutpoints_; }
  std::string_view name() const noexcept;

  friend bool operator==(const ModelFamily&, const ModelFamily&) = default;

 private:
  ModelFamily(FamilyKind kind, int num_cutpoints) : kind_(kind), num_cutpoints_(num_cutpoints) {}

  FamilyKind kind_;
  int num_cutpoints_;
};

/// One worker's share of the data. Immutable once built.
///
/// `response` holds the real response (linear), 0/1 labels (logistic),
/// counts (poisson), survival times (cox) or ordinal levels 1..L stored as
/// doubles (ordered-probit). `event` is only populated for survival data.
class DataPartition {
 public:
  DataPartition(std::uint64_t id, Eigen::MatrixXd covariates, Eigen::VectorXd response);
  static DataPartition survival(std::uint64_t id, Eigen::MatrixXd covariates, Eigen::VectorXd time,
                                Eigen::VectorXd event);

  std::uint64_t id() const noexcept { return id_; }
  Eigen::Index rows() const noexcept { return covariates_.rows(); }
  Eigen::Index cols() const noexcept { return covariates_.cols(); }
  const Eigen::MatrixXd& covariates() const noexcept { return covariates_; }
  const Eigen::VectorXd& response() const noexcept { return response_; }
  const Eigen::VectorXd& event() const noexcept { return event_; }
  bool has_event() const noexcept { return event_.size() > 0; }

  /// Throws InputError when the partition violates the family's invariants
  /// (too few rows, bad labels, non-positive times, out-of-range levels).
  void validate(const ModelFamily& family) const;

  /// Rows reordered as `order[0], order[1], ...`.
  DataPartition permuted(std::span<const Eigen::Index> order) const;

 private:
  std::uint64_t id_;
  Eigen::MatrixXd covariates_;
  Eigen::VectorXd response_;
  Eigen::VectorXd event_;
};

/// Stacks partitions row-wise into one partition with the given id.
DataPartition pool(std::span<const DataPartition> parts, std::uint64_t id = 0);

struct ParamVector {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd cutpoints;  // empty unless ordered-probit

  ParamVector() = default;
  explicit ParamVector(Eigen::VectorXd coef, Eigen::VectorXd cuts = {})
      : coefficients(std::move(coef)), cutpoints(std::move(cuts)) {}

  Eigen::Index size() const noexcept { return coefficients.size() + cutpoints.size(); }
  /// Coefficients followed by cutpoints.
  Eigen::VectorXd stacked() const;
  static ParamVector from_stacked(const Eigen::VectorXd& v, Eigen::Index num_cutpoints);
  bool cutpoints_increasing() const noexcept;
};

/// What a worker sends to the master: the local estimate and n_k times the
/// local Hessian at that estimate (n_k Σ̂_k⁻¹). The precision is symmetrized
/// on construction and must be positive definite.
class LocalSummary {
 public:
  LocalSummary(ModelFamily family, std::uint64_t partition_id, std::uint64_t n,
               ParamVector theta_hat, const Eigen::MatrixXd& precision);

  const ModelFamily& family() const noexcept { return family_; }
  std::uint64_t partition_id() const noexcept { return partition_id_; }
  std::uint64_t n() const noexcept { return n_; }
  const ParamVector& theta_hat() const noexcept { return theta_hat_; }
  const Eigen::MatrixXd& precision() const noexcept { return precision_; }
  Eigen::Index q() const noexcept { return precision_.rows(); }

  friend bool operator==(const LocalSummary& a, const LocalSummary& b);

 private:
  ModelFamily family_;
  std::uint64_t partition_id_;
  std::uint64_t n_;
  ParamVector theta_hat_;
  Eigen::MatrixXd precision_;
};

/// Linear predictors are clamped to this magnitude inside the logistic,
/// poisson and probit links.
inline constexpr double kLinkClamp = 30.0;

/// Mean per-sample loss ℒ_k(θ): 0.5·MSE for linear, mean negative
/// log-likelihood otherwise (negative log partial likelihood with Breslow
/// ties for cox).
double loss(const ModelFamily& family, const ParamVector& theta, const DataPartition& data);
Eigen::VectorXd gradient(const ModelFamily& family, const ParamVector& theta,
                         const DataPartition& data);
/// Symmetric bit-for-bit.
Eigen::MatrixXd hessian(const ModelFamily& family, const ParamVector& theta,
                        const DataPartition& data);

struct NewtonOptions {
  int max_iterations = 100;
  int max_halvings = 30;
  double gradient_tolerance = 1e-8;
};

/// Minimizes ℒ_k by damped Newton with step-halving and returns the local
/// summary. Default start is zero coefficients (and empirical-quantile probit
/// cutpoints for ordered-probit).
///
/// Throws NonConvergence when the iteration cap is hit or the line search is
/// exhausted, SingularHessian when a Newton step cannot be solved.
LocalSummary fit_local(const ModelFamily& family, const DataPartition& data,
                       const std::optional<ParamVector>& init = std::nullopt,
                       const NewtonOptions& options = {});

/// Default Newton start for a family on a given partition.
ParamVector default_init(const ModelFamily& family, const DataPartition& data);

}  // namespace dlsa
