#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dlsa/glm.hpp"
#include "dlsa/shrinkage.hpp"

namespace dlsa::sim {

enum class Setting { iid = 1, heterogeneous = 2 };

/// One Monte Carlo scenario. Examples are numbered 1..5 in the order
/// linear, logistic, poisson, cox, ordered-probit.
struct ScenarioSpec {
  int example = 1;
  Setting setting = Setting::iid;
  std::uint64_t n_total = 10000;
  std::uint64_t workers = 5;
  std::uint64_t replications = 100;
  std::uint64_t seed = 12345;
  /// Threads used for replications; 0 means hardware concurrency.
  unsigned threads = 0;

  /// Throws ConfigError unless 1 <= example <= 5, K divides N and R >= 1.
  void validate() const;
  std::uint64_t per_worker() const { return n_total / workers; }
};

/// Censoring for the survival example: C ~ Exponential with mean
/// u · exp(-xᵀθ₀), u ~ U[u_low, u_high].
struct CoxCensoring {
  double u_low = 1.0;
  double u_high = 3.0;
};

struct TrueParams {
  ModelFamily family = ModelFamily::linear();
  Eigen::VectorXd theta0;
  Eigen::VectorXd cutpoints0;  // ordered-probit only
  std::optional<CoxCensoring> censoring;

  /// Nonzero indices of θ₀ (0-based).
  IndexSet true_support() const;
};

/// The fixed per-example truth (p = 8 throughout).
TrueParams true_params(int example);

struct GeneratedData {
  std::vector<DataPartition> partitions;
  TrueParams truth;
};

/// Deterministic in (spec.seed, replication): worker k draws from its own
/// Philox substream, and the heterogeneous setting redraws (μ_k, ρ_k) for
/// every replication.
GeneratedData generate(const ScenarioSpec& spec, std::uint64_t replication);

/// Estimates from one replication, each a length-p coefficient vector.
struct ReplicationResult {
  std::uint64_t replication = 0;
  Eigen::VectorXd global;
  Eigen::VectorXd os;
  Eigen::VectorXd csl;
  Eigen::VectorXd dlsa;
  Eigen::VectorXd sdlsa;
  IndexSet selected;  // coefficient indices chosen by DBIC
};

/// Throws NumericalError subclasses when a fit fails.
ReplicationResult run_replication(const ScenarioSpec& spec, std::uint64_t replication);

struct EstimatorRow {
  std::string name;
  Eigen::VectorXd rmse;
  Eigen::VectorXd ree;  // RMSE_global / RMSE; NaN where not reported
};

struct SimulationReport {
  ScenarioSpec spec;
  Eigen::VectorXd theta0;
  Eigen::VectorXd rmse_global;
  std::vector<EstimatorRow> rows;  // OS, CSL, DLSA, SDLSA in that order
  double ms = 0.0;
  double cm = 0.0;
  std::size_t successes = 0;
  std::size_t failures = 0;
  std::vector<std::string> failure_messages;

  const EstimatorRow& row(std::string_view name) const;
};

/// {R⁻¹ Σ_r (θ_j⁽ʳ⁾ - θ₀ⱼ)²}^{1/2} per coefficient.
Eigen::VectorXd rmse(std::span<const Eigen::VectorXd> estimates, const Eigen::VectorXd& truth);

/// Aggregates replication results into RMSE/REE/MS/CM. REE for SDLSA is only
/// reported on the true support. Throws InputError on an empty input.
SimulationReport metrics(std::span<const ReplicationResult> results, const TrueParams& truth,
                         const ScenarioSpec& spec);

/// Runs every replication (in parallel) and aggregates. Failed replications
/// are recorded and excluded; more than 2% failures aborts with
/// NumericalError.
SimulationReport run_scenario(const ScenarioSpec& spec);

/// Aligned plain-text table in the layout OS / CSL / DLSA / SDLSA by θ_j.
std::string format_table(const SimulationReport& report);

std::string_view setting_name(Setting s);

}  // namespace dlsa::sim
