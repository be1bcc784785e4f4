#pragma once

// Reference computations used as test oracles. Each is written directly from
// its defining formula and shares no code with the library beyond the public
// value types.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "dlsa/glm.hpp"

namespace oracle {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Central differences of a scalar function.
inline VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f, const VectorXd& x,
                            double h = 1e-6) {
  VectorXd g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    VectorXd a = x, b = x;
    a(i) += h;
    b(i) -= h;
    g(i) = (f(a) - f(b)) / (2 * h);
  }
  return g;
}

/// Central differences of a vector function, column i = d/dx_i.
inline MatrixXd fd_jacobian(const std::function<VectorXd(const VectorXd&)>& f, const VectorXd& x,
                            double h = 1e-6) {
  const auto m = f(x).size();
  MatrixXd j(m, x.size());
  for (Index i = 0; i < x.size(); ++i) {
    VectorXd a = x, b = x;
    a(i) += h;
    b(i) -= h;
    j.col(i) = (f(a) - f(b)) / (2 * h);
  }
  return j;
}

/// max |a - b| / max(1, |b|), elementwise.
inline double rel_error(const MatrixXd& a, const MatrixXd& b) {
  return ((a - b).array().abs() / b.array().abs().max(1.0)).maxCoeff();
}

/// Breslow negative log partial likelihood by direct double loop.
inline double cox_loss(const VectorXd& theta, const MatrixXd& x, const VectorXd& time,
                       const VectorXd& event) {
  const VectorXd eta = x * theta;
  double total = 0.0;
  for (Index i = 0; i < x.rows(); ++i) {
    if (event(i) != 1.0) continue;
    double risk = 0.0;
    for (Index j = 0; j < x.rows(); ++j) {
      if (time(j) >= time(i)) risk += std::exp(eta(j));
    }
    total += eta(i) - std::log(risk);
  }
  return -total / static_cast<double>(x.rows());
}

/// Ordered-probit mean negative log-likelihood; levels in 1..L.
inline double ordered_probit_loss(const VectorXd& theta, const VectorXd& cuts, const MatrixXd& x,
                                  const VectorXd& y) {
  const VectorXd eta = x * theta;
  double total = 0.0;
  for (Index i = 0; i < x.rows(); ++i) {
    const int l = static_cast<int>(y(i));
    const double upper = l == cuts.size() + 1 ? 1.0 : normal_cdf(cuts(l - 1) - eta(i));
    const double lower = l == 1 ? 0.0 : normal_cdf(cuts(l - 2) - eta(i));
    total += std::log(upper - lower);
  }
  return -total / static_cast<double>(x.rows());
}

/// Least squares by column-pivoted Householder QR of the stacked data.
inline VectorXd ols(const MatrixXd& x, const VectorXd& y) { return x.colPivHouseholderQr().solve(y); }

/// argmin (θ-θ̃)ᵀΩ(θ-θ̃) s.t. θ_j = 0 off `support`, from the dense KKT
/// system [Ω Eᵀ; E 0][θ; ν] = [Ωθ̃; 0] with E selecting the off-support
/// coordinates.
inline VectorXd constrained_refit(const MatrixXd& omega, const VectorXd& theta_tilde,
                                  const std::vector<Index>& support) {
  const auto q = omega.rows();
  std::vector<bool> on(q, false);
  for (auto j : support) on[j] = true;
  std::vector<Index> off;
  for (Index j = 0; j < q; ++j) {
    if (!on[j]) off.push_back(j);
  }
  const auto m = static_cast<Index>(off.size());
  MatrixXd kkt = MatrixXd::Zero(q + m, q + m);
  VectorXd rhs = VectorXd::Zero(q + m);
  kkt.topLeftCorner(q, q) = omega;
  rhs.head(q) = omega * theta_tilde;
  for (Index r = 0; r < m; ++r) {
    kkt(q + r, off[r]) = 1.0;
    kkt(off[r], q + r) = 1.0;
  }
  return kkt.fullPivLu().solve(rhs).head(q);
}

/// Worst violation of the adaptive-lasso optimality conditions of
///   (θ-θ̃)ᵀΩ(θ-θ̃) + λ Σ w_j |θ_j|
/// with w_j = 0 for unpenalized coordinates.
inline double kkt_violation(const MatrixXd& omega, const VectorXd& theta_tilde, const VectorXd& w,
                            double lambda, const VectorXd& theta) {
  const VectorXd g = 2.0 * omega * (theta - theta_tilde);
  double worst = 0.0;
  for (Index j = 0; j < theta.size(); ++j) {
    const double bound = lambda * w(j);
    double v;
    if (theta(j) != 0.0) {
      v = std::abs(g(j) + bound * (theta(j) > 0 ? 1.0 : -1.0));
    } else {
      v = std::max(0.0, std::abs(g(j)) - bound);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

/// Soft-threshold path for diagonal Ω = diag(d):
/// θ_j(λ) = sign(θ̃_j) max(|θ̃_j| - λ / (2 d_j |θ̃_j|), 0).
inline VectorXd diagonal_solution(const VectorXd& d, const VectorXd& theta_tilde, double lambda) {
  VectorXd out(theta_tilde.size());
  for (Index j = 0; j < out.size(); ++j) {
    const double a = std::abs(theta_tilde(j));
    const double shrunk = std::max(a - lambda / (2 * d(j) * a), 0.0);
    out(j) = theta_tilde(j) > 0 ? shrunk : -shrunk;
  }
  return out;
}

struct BruteForceDbic {
  double value = std::numeric_limits<double>::infinity();
  double lambda = 0.0;
  std::vector<Index> support;
};

/// Minimum of DBIC over λ ≥ 0 by enumerating every (support, sign pattern).
/// For fixed support S and signs s the adaptive-lasso solution is
///   θ_S(λ) = θ^refit_S - (λ/2) Ω_SS⁻¹ (w∘s)_S,
/// valid on the λ interval where the signs hold and the off-support
/// subgradient bound is met. The quadratic term is increasing in λ there, so
/// the interval's lower end is the candidate. Coordinates with w_j = 0 are
/// unpenalized and always in S.
inline BruteForceDbic brute_force_dbic(const MatrixXd& omega, const VectorXd& theta_tilde,
                                       const VectorXd& w, std::uint64_t n) {
  const auto q = theta_tilde.size();
  const double log_n = std::log(static_cast<double>(n)) / static_cast<double>(n);
  BruteForceDbic best;
  std::vector<int> state(q, 0);  // 0 off, 1 positive, 2 negative
  const auto total = static_cast<std::uint64_t>(std::pow(3.0, static_cast<double>(q)));
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t c = code;
    bool valid = true;
    std::vector<Index> support;
    for (Index j = 0; j < q; ++j) {
      state[j] = static_cast<int>(c % 3);
      c /= 3;
      if (w(j) == 0.0 && state[j] != 1) valid = false;  // unpenalized: enumerate once
      if (state[j] != 0) support.push_back(j);
    }
    if (!valid) continue;
    const auto s = static_cast<Index>(support.size());
    VectorXd base = VectorXd::Zero(q), dir = VectorXd::Zero(q);
    if (s > 0) {
      MatrixXd block(s, s);
      VectorXd rhs(s), ws(s);
      for (Index a = 0; a < s; ++a) {
        for (Index b = 0; b < s; ++b) block(a, b) = omega(support[a], support[b]);
        rhs(a) = omega.row(support[a]).dot(theta_tilde);
        const int st = state[support[a]];
        ws(a) = w(support[a]) * (st == 1 ? 1.0 : -1.0);
        if (w(support[a]) == 0.0) ws(a) = 0.0;
      }
      const auto lu = block.fullPivLu();
      const VectorXd refit = lu.solve(rhs);
      const VectorXd slope = 0.5 * lu.solve(ws);
      for (Index a = 0; a < s; ++a) {
        base(support[a]) = refit(a);
        dir(support[a]) = -slope(a);
      }
    }
    // θ(λ) = base + λ dir; every constraint has the form a λ + b ≥ 0.
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    const auto add = [&](double a, double b) {  // a λ + b ≥ 0
      if (a > 0) {
        lo = std::max(lo, -b / a);
      } else if (a < 0) {
        hi = std::min(hi, -b / a);
      } else if (b < 0) {
        lo = std::numeric_limits<double>::infinity();
      }
    };
    for (Index a = 0; a < s; ++a) {
      const Index j = support[a];
      if (w(j) == 0.0) continue;
      const double sign = state[j] == 1 ? 1.0 : -1.0;
      add(sign * dir(j), sign * base(j));
    }
    const VectorXd g0 = 2.0 * omega * (base - theta_tilde);
    const VectorXd g1 = 2.0 * omega * dir;
    for (Index j = 0; j < q; ++j) {
      if (state[j] != 0) continue;
      // |g0 + λ g1| ≤ λ w_j
      add(w(j) - g1(j), -g0(j));
      add(w(j) + g1(j), g0(j));
    }
    if (!(lo <= hi + 1e-12 * std::max(1.0, std::abs(lo)))) continue;
    const VectorXd theta = base + lo * dir;
    const VectorXd diff = theta - theta_tilde;
    const double value = diff.dot(omega * diff) + log_n * static_cast<double>(s);
    if (value < best.value) {
      best.value = value;
      best.lambda = lo;
      best.support = support;
    }
  }
  return best;
}

/// Random symmetric positive definite matrix with condition number bounded
/// by roughly `spread`.
template <typename Rng>
MatrixXd random_spd(Index q, Rng& rng, double spread = 10.0) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(1.0, spread);
  MatrixXd a(q, q);
  for (Index i = 0; i < q; ++i) {
    for (Index j = 0; j < q; ++j) a(i, j) = normal(rng);
  }
  const Eigen::HouseholderQR<MatrixXd> qr(a);
  const MatrixXd u = qr.householderQ();
  VectorXd eig(q);
  for (Index i = 0; i < q; ++i) eig(i) = unif(rng);
  MatrixXd out = u * eig.asDiagonal() * u.transpose();
  return (out + out.transpose()) / 2;
}

template <typename Rng>
MatrixXd random_matrix(Index rows, Index cols, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

template <typename Rng>
VectorXd random_vector(Index n, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

}  // namespace oracle
