#pragma once

// Random data partitions for tests, drawn with std::mt19937_64 so they are
// independent of the library's generator.

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "dlsa/glm.hpp"

namespace fixture {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// n rows from `family` with N(0, scale²) covariates and coefficients `theta`.
/// Ordered-probit uses `cuts`; cox gets exponential times with a few exact
/// ties and ~30% censoring.
inline dlsa::DataPartition draw(const dlsa::ModelFamily& family, Index n, const VectorXd& theta,
                                std::mt19937_64& rng, double scale = 1.0,
                                const VectorXd& cuts = {}, std::uint64_t id = 0) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  const auto p = theta.size();
  MatrixXd x(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) x(i, j) = scale * normal(rng);
  }
  const VectorXd eta = x * theta;
  VectorXd y(n);
  switch (family.kind()) {
    case dlsa::FamilyKind::linear:
      for (Index i = 0; i < n; ++i) y(i) = eta(i) + normal(rng);
      break;
    case dlsa::FamilyKind::logistic:
      for (Index i = 0; i < n; ++i) y(i) = unif(rng) < 1.0 / (1.0 + std::exp(-eta(i))) ? 1.0 : 0.0;
      break;
    case dlsa::FamilyKind::poisson:
      for (Index i = 0; i < n; ++i) {
        y(i) = static_cast<double>(std::poisson_distribution<int>(std::exp(eta(i)))(rng));
      }
      break;
    case dlsa::FamilyKind::ordered_probit:
      for (Index i = 0; i < n; ++i) {
        const double latent = eta(i) + normal(rng);
        int level = 1;
        while (level <= cuts.size() && latent > cuts(level - 1)) ++level;
        y(i) = level;
      }
      break;
    case dlsa::FamilyKind::cox: {
      VectorXd event(n);
      for (Index i = 0; i < n; ++i) {
        const double t = std::exponential_distribution<double>(std::exp(eta(i)))(rng);
        const double c = std::exponential_distribution<double>(std::exp(eta(i)) / 2.0)(rng);
        // Round to 2 decimals so that some times tie.
        y(i) = std::max(0.01, std::round(std::min(t, c) * 100.0) / 100.0);
        event(i) = t <= c ? 1.0 : 0.0;
      }
      return dlsa::DataPartition::survival(id, std::move(x), std::move(y), std::move(event));
    }
  }
  return {id, std::move(x), std::move(y)};
}

inline dlsa::ParamVector probe_params(const dlsa::ModelFamily& family, Index p, std::mt19937_64& rng,
                                      double scale = 0.3) {
  std::normal_distribution<double> normal(0.0, scale);
  VectorXd coef(p);
  for (Index j = 0; j < p; ++j) coef(j) = normal(rng);
  VectorXd cuts(family.num_cutpoints());
  double c = -1.0;
  std::uniform_real_distribution<double> gap(0.3, 1.0);
  for (Index l = 0; l < cuts.size(); ++l) {
    cuts(l) = c;
    c += gap(rng);
  }
  return dlsa::ParamVector(coef, cuts);
}

inline const dlsa::ModelFamily& family_of(int i) {
  static const dlsa::ModelFamily all[] = {dlsa::ModelFamily::linear(), dlsa::ModelFamily::logistic(),
                                          dlsa::ModelFamily::poisson(), dlsa::ModelFamily::cox(),
                                          dlsa::ModelFamily::ordered_probit(4)};
  return all[i];
}

inline VectorXd default_cuts() { return (VectorXd(3) << -1.0, 0.0, 0.8).finished(); }

}  // namespace fixture
