#include "dlsa/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "dlsa/combiner.hpp"
#include "dlsa/errors.hpp"
#include "dlsa/random.hpp"

namespace dlsa::sim {
namespace {

constexpr std::uint64_t kHeterogeneityStream = 0;
constexpr std::uint64_t kDataStream = 1;

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

// Covariates for one worker: N(0, I) or N(μ_k, Σ_k) with Σ_k = (ρ_k^|i-j|).
// The AR(1) recursion x_j = ρ x_{j-1} + sqrt(1 - ρ²) z_j yields exactly
// that correlation with unit variances.
Eigen::MatrixXd draw_covariates(Philox4x32& rng, Eigen::Index n, Eigen::Index p, Setting setting,
                                const Eigen::VectorXd& mu, double rho) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(n, p);
  const double innovation = std::sqrt(1.0 - rho * rho);
  for (Eigen::Index i = 0; i < n; ++i) {
    double prev = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double z = normal(rng);
      if (setting == Setting::iid) {
        x(i, j) = z;
      } else {
        prev = j == 0 ? z : rho * prev + innovation * z;
        x(i, j) = mu(j) + prev;
      }
    }
  }
  return x;
}

}  // namespace

std::string_view setting_name(Setting s) {
  return s == Setting::iid ? "i.i.d. covariates" : "heterogeneous covariates";
}

void ScenarioSpec::validate() const {
  if (example < 1 || example > 5) throw ConfigError("example must be in 1..5");
  if (workers == 0) throw ConfigError("K must be positive");
  if (n_total % workers != 0) throw ConfigError("N must be divisible by K");
  if (replications == 0) throw ConfigError("R must be at least 1");
  if (workers > 0xFFFF) throw ConfigError("K too large");
}

IndexSet TrueParams::true_support() const {
  IndexSet s;
  for (Eigen::Index j = 0; j < theta0.size(); ++j) {
    if (theta0(j) != 0.0) s.push_back(j);
  }
  return s;
}

TrueParams true_params(int example) {
  TrueParams t;
  switch (example) {
    case 1:
      t.family = ModelFamily::linear();
      t.theta0 = vec({3, 1.5, 0, 0, 2, 0, 0, 0});
      break;
    case 2:
      t.family = ModelFamily::logistic();
      t.theta0 = vec({3, 0, 0, 1.5, 0, 0, 2, 0});
      break;
    case 3:
      t.family = ModelFamily::poisson();
      t.theta0 = vec({0.8, 0, 0, 1, 0, 0, -0.4, 0});
      break;
    case 4:
      t.family = ModelFamily::cox();
      t.theta0 = vec({0.8, 0, 0, 1, 0, 0, 0.6, 0});
      t.censoring = CoxCensoring{};
      break;
    case 5:
      t.family = ModelFamily::ordered_probit(4);
      t.theta0 = vec({0.8, 0, 0, 1, 0, 0, 0.6, 0});
      t.cutpoints0 = vec({-1, 0, 0.8});
      break;
    default:
      throw ConfigError("example must be in 1..5");
  }
  return t;
}

GeneratedData generate(const ScenarioSpec& spec, std::uint64_t replication) {
  spec.validate();
  GeneratedData out;
  out.truth = true_params(spec.example);
  const auto& truth = out.truth;
  const auto p = truth.theta0.size();
  const auto n = static_cast<Eigen::Index>(spec.per_worker());

  out.partitions.reserve(spec.workers);
  for (std::uint64_t k = 0; k < spec.workers; ++k) {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(p);
    double rho = 0.0;
    if (spec.setting == Setting::heterogeneous) {
      Philox4x32 het(spec.seed, stream_id(replication, k, kHeterogeneityStream));
      std::uniform_real_distribution<double> mean_dist(-1.0, 1.0);
      for (Eigen::Index j = 0; j < p; ++j) mu(j) = mean_dist(het);
      rho = std::uniform_real_distribution<double>(0.3, 0.4)(het);
    }

    Philox4x32 rng(spec.seed, stream_id(replication, k, kDataStream));
    Eigen::MatrixXd x = draw_covariates(rng, n, p, spec.setting, mu, rho);
    const Eigen::VectorXd eta = x * truth.theta0;
    Eigen::VectorXd y(n);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif;

    switch (truth.family.kind()) {
      case FamilyKind::linear:
        for (Eigen::Index i = 0; i < n; ++i) y(i) = eta(i) + normal(rng);
        break;
      case FamilyKind::logistic:
        for (Eigen::Index i = 0; i < n; ++i) y(i) = unif(rng) < sigmoid(eta(i)) ? 1.0 : 0.0;
        break;
      case FamilyKind::poisson:
        for (Eigen::Index i = 0; i < n; ++i) {
          y(i) = static_cast<double>(std::poisson_distribution<long>(std::exp(eta(i)))(rng));
        }
        break;
      case FamilyKind::ordered_probit:
        for (Eigen::Index i = 0; i < n; ++i) {
          const double latent = eta(i) + normal(rng);
          double level = 1.0;
          for (Eigen::Index l = 0; l < truth.cutpoints0.size(); ++l) {
            if (latent > truth.cutpoints0(l)) level += 1.0;
          }
          y(i) = level;
        }
        break;
      case FamilyKind::cox: {
        const auto& cens = *truth.censoring;
        Eigen::VectorXd event(n);
        std::uniform_real_distribution<double> u_dist(cens.u_low, cens.u_high);
        for (Eigen::Index i = 0; i < n; ++i) {
          // Survival mean exp(-η); censoring mean u·exp(-η).
          const double mean = std::exp(-eta(i));
          const double t = std::exponential_distribution<double>(1.0 / mean)(rng);
          const double u = u_dist(rng);
          const double c = std::exponential_distribution<double>(1.0 / (u * mean))(rng);
          y(i) = std::min(t, c);
          event(i) = t <= c ? 1.0 : 0.0;
        }
        out.partitions.push_back(DataPartition::survival(k, std::move(x), std::move(y), std::move(event)));
        continue;
      }
    }
    out.partitions.emplace_back(k, std::move(x), std::move(y));
  }
  return out;
}

ReplicationResult run_replication(const ScenarioSpec& spec, std::uint64_t replication) {
  const auto data = generate(spec, replication);
  const auto& family = data.truth.family;
  const auto p = data.truth.theta0.size();

  std::vector<LocalSummary> summaries;
  summaries.reserve(data.partitions.size());
  for (const auto& part : data.partitions) summaries.push_back(fit_local(family, part));

  const auto pooled = pool(data.partitions);
  const auto global = fit_local(family, pooled);
  const auto fit = combine_wlse(summaries);
  const auto path = lasso_path(fit, default_penalized(fit));
  const auto selection = dbic(path, fit);

  ReplicationResult r;
  r.replication = replication;
  r.global = global.theta_hat().coefficients;
  r.os = combine_os(summaries).coefficients;
  r.csl = combine_csl(summaries, data.partitions, family).coefficients;
  r.dlsa = fit.theta_tilde.coefficients;
  r.sdlsa = selection.theta_selected.head(p);
  for (auto j : selection.support) {
    if (j < p) r.selected.push_back(j);
  }
  return r;
}

Eigen::VectorXd rmse(std::span<const Eigen::VectorXd> estimates, const Eigen::VectorXd& truth) {
  if (estimates.empty()) throw InputError("RMSE over zero replications");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(truth.size());
  for (const auto& e : estimates) {
    if (e.size() != truth.size()) throw DimensionMismatch("estimate length");
    acc += (e - truth).array().square().matrix();
  }
  return (acc / static_cast<double>(estimates.size())).array().sqrt();
}

const EstimatorRow& SimulationReport::row(std::string_view name) const {
  for (const auto& r : rows) {
    if (r.name == name) return r;
  }
  throw InputError("no estimator row named " + std::string(name));
}

SimulationReport metrics(std::span<const ReplicationResult> results, const TrueParams& truth,
                         const ScenarioSpec& spec) {
  if (results.empty()) throw InputError("no successful replications to summarize");
  const auto& theta0 = truth.theta0;
  const auto pick = [&](Eigen::VectorXd ReplicationResult::*member) {
    std::vector<Eigen::VectorXd> v;
    v.reserve(results.size());
    for (const auto& r : results) v.push_back(r.*member);
    return v;
  };

  SimulationReport rep;
  rep.spec = spec;
  rep.theta0 = theta0;
  rep.successes = results.size();
  rep.rmse_global = rmse(pick(&ReplicationResult::global), theta0);

  const auto support = truth.true_support();
  const auto nan = std::numeric_limits<double>::quiet_NaN();
  const std::pair<const char*, Eigen::VectorXd ReplicationResult::*> estimators[] = {
      {"OS", &ReplicationResult::os},
      {"CSL", &ReplicationResult::csl},
      {"DLSA", &ReplicationResult::dlsa},
      {"SDLSA", &ReplicationResult::sdlsa},
  };
  for (const auto& [name, member] : estimators) {
    EstimatorRow row;
    row.name = name;
    row.rmse = rmse(pick(member), theta0);
    row.ree = rep.rmse_global.array() / row.rmse.array();
    if (row.name == "SDLSA") {
      Eigen::VectorXd masked = Eigen::VectorXd::Constant(theta0.size(), nan);
      for (auto j : support) masked(j) = row.ree(j);
      row.ree = masked;
    }
    rep.rows.push_back(std::move(row));
  }

  double size_sum = 0.0;
  double correct = 0.0;
  for (const auto& r : results) {
    size_sum += static_cast<double>(r.selected.size());
    if (r.selected == support) correct += 1.0;
  }
  rep.ms = size_sum / static_cast<double>(results.size());
  rep.cm = correct / static_cast<double>(results.size());
  return rep;
}

SimulationReport run_scenario(const ScenarioSpec& spec) {
  spec.validate();
  const auto reps = spec.replications;
  std::vector<std::optional<ReplicationResult>> slots(reps);
  std::vector<std::string> errors(reps);

  std::atomic<std::uint64_t> next{0};
  const auto worker = [&] {
    for (std::uint64_t r = next++; r < reps; r = next++) {
      try {
        slots[r] = run_replication(spec, r);
      } catch (const NumericalError& e) {
        errors[r] = e.what();
      }
    }
  };
  unsigned threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, reps));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<ReplicationResult> ok;
  std::vector<std::string> failures;
  for (std::uint64_t r = 0; r < reps; ++r) {
    if (slots[r]) {
      ok.push_back(std::move(*slots[r]));
    } else {
      failures.push_back("replication " + std::to_string(r) + ": " + errors[r]);
    }
  }
  if (static_cast<double>(failures.size()) > 0.02 * static_cast<double>(reps)) {
    throw NumericalError("scenario aborted: " + std::to_string(failures.size()) + " of " +
                         std::to_string(reps) + " replications failed; first: " + failures.front());
  }
  auto report = metrics(ok, true_params(spec.example), spec);
  report.failures = failures.size();
  report.failure_messages = std::move(failures);
  return report;
}

std::string format_table(const SimulationReport& report) {
  const auto& spec = report.spec;
  const auto truth = true_params(spec.example);
  const auto p = report.theta0.size();
  std::ostringstream out;
  out << "Example " << spec.example << " (" << truth.family.name() << "), Setting "
      << static_cast<int>(spec.setting) << ": " << setting_name(spec.setting) << '\n';
  out << "N = " << spec.n_total << ", K = " << spec.workers << ", R = " << spec.replications
      << " (" << report.failures << " failed), seed = " << spec.seed << '\n';
  out << std::left << std::setw(7) << "Est.";
  for (Eigen::Index j = 0; j < p; ++j) out << std::right << std::setw(7) << ("theta" + std::to_string(j + 1));
  out << std::setw(7) << "MS" << std::setw(7) << "CM" << '\n';
  out << std::fixed << std::setprecision(2);
  for (const auto& row : report.rows) {
    out << std::left << std::setw(7) << row.name << std::right;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (std::isnan(row.ree(j))) {
        out << std::setw(7) << "-";
      } else {
        out << std::setw(7) << row.ree(j);
      }
    }
    if (row.name == "SDLSA") out << std::setw(7) << report.ms << std::setw(7) << report.cm;
    out << '\n';
  }
  return out.str();
}

}  // namespace dlsa::sim
