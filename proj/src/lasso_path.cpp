#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dlsa/errors.hpp"
#include "dlsa/linalg.hpp"
#include "dlsa/shrinkage.hpp"

namespace dlsa {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Two events closer than this (relative) are treated as simultaneous.
constexpr double kTieTolerance = 1e-12;

Eigen::MatrixXd take(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows,
                     const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  }
  return out;
}

IndexSet nonzero(const Eigen::VectorXd& v) {
  IndexSet s;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (v(j) != 0.0) s.push_back(j);
  }
  return s;
}

// Homotopy state in the standardized coordinates β (θ_j = scale_j β_j).
// `active` lists the work columns in the current active set: unpenalized
// columns always, penalized ones while their β is nonzero on the segment.
struct Homotopy {
  Eigen::MatrixXd gram;      // ÃᵀÃ
  Eigen::VectorXd corr;      // Ãᵀỹ
  std::vector<bool> is_free;
  std::vector<Eigen::Index> active;
  std::vector<double> sign;  // per work column, ±1 for active penalized

  // β_E(λ) = a - λ d on the active set.
  void direction(Eigen::VectorXd& a, Eigen::VectorXd& d) const {
    const auto m = static_cast<Eigen::Index>(active.size());
    a.resize(m);
    d.resize(m);
    if (m == 0) return;
    const Eigen::MatrixXd g = take(gram, active, active);
    Eigen::VectorXd c(m), b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      c(i) = corr(active[i]);
      b(i) = is_free[active[i]] ? 0.0 : sign[active[i]];
    }
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) throw NonPositiveDefinite("active Gram block is singular");
    a = llt.solve(c);
    d = 0.5 * llt.solve(b);
  }
};

}  // namespace

IndexSet default_penalized(const CombinedFit& fit) {
  IndexSet s(static_cast<std::size_t>(fit.theta_tilde.coefficients.size()));
  for (std::size_t j = 0; j < s.size(); ++j) s[j] = static_cast<Eigen::Index>(j);
  return s;
}

LassoPath lasso_path(const CombinedFit& fit, std::span<const Eigen::Index> penalize) {
  return lasso_path(fit.precision, fit.theta_tilde.stacked(), penalize);
}

LassoPath lasso_path(const Eigen::MatrixXd& precision, const Eigen::VectorXd& theta_tilde,
                     std::span<const Eigen::Index> penalize) {
  const auto q = theta_tilde.size();
  if (precision.rows() != q || precision.cols() != q) {
    throw DimensionMismatch("precision does not match theta");
  }
  Eigen::LLT<Eigen::MatrixXd> chol(precision);
  if (chol.info() != Eigen::Success || !linalg::is_positive_definite(precision)) {
    throw NonPositiveDefinite("combined precision is not positive definite");
  }

  LassoPath path;
  path.weights = Eigen::VectorXd::Zero(q);
  std::vector<bool> penalized(static_cast<std::size_t>(q), false);
  for (auto j : penalize) {
    if (j < 0 || j >= q) throw InputError("penalized index " + std::to_string(j) + " out of range");
    penalized[j] = true;
  }
  for (Eigen::Index j = 0; j < q; ++j) {
    if (penalized[j]) path.penalized.push_back(j);
  }

  // Work columns: every coordinate except pinned ones (θ̃_j = 0 to machine
  // precision, i.e. an infinite weight).
  const double zero_level = std::numeric_limits<double>::epsilon() * theta_tilde.lpNorm<Eigen::Infinity>();
  std::vector<Eigen::Index> work;
  Eigen::VectorXd scale(q);
  for (Eigen::Index j = 0; j < q; ++j) {
    if (penalized[j] && std::abs(theta_tilde(j)) <= zero_level) {
      path.weights(j) = kInf;
      continue;
    }
    work.push_back(j);
    if (penalized[j]) {
      path.weights(j) = 1.0 / std::abs(theta_tilde(j));
      scale(j) = std::abs(theta_tilde(j));
    } else {
      scale(j) = 1.0;
    }
  }
  const auto m = static_cast<Eigen::Index>(work.size());

  // Pseudo-design à = Lᵀ diag(scale) on work columns and response ỹ = Lᵀθ̃.
  const Eigen::MatrixXd lt = chol.matrixU();
  Eigen::MatrixXd design(q, m);
  for (Eigen::Index c = 0; c < m; ++c) design.col(c) = lt.col(work[c]) * scale(work[c]);
  const Eigen::VectorXd response = lt * theta_tilde;

  Homotopy h;
  h.gram = design.transpose() * design;
  h.corr = design.transpose() * response;
  h.is_free.resize(m);
  h.sign.assign(m, 0.0);
  for (Eigen::Index c = 0; c < m; ++c) {
    h.is_free[c] = !penalized[work[c]];
    if (h.is_free[c]) h.active.push_back(c);
  }

  const auto record = [&](double lambda, const Eigen::VectorXd& beta_active,
                          const std::vector<Eigen::Index>& zeroed) {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(q);
    for (std::size_t i = 0; i < h.active.size(); ++i) {
      const auto c = h.active[i];
      theta(work[c]) = scale(work[c]) * beta_active(static_cast<Eigen::Index>(i));
    }
    for (auto c : zeroed) theta(work[c]) = 0.0;
    path.knots.push_back(lambda);
    path.active_sets.push_back(nonzero(theta));
    path.df.push_back(static_cast<int>(path.active_sets.back().size()));
    path.coefficients.push_back(std::move(theta));
  };

  double lambda = kInf;
  Eigen::Index just_dropped = -1;
  const int max_steps = 8 * static_cast<int>(m) + 8;
  for (int step = 0; step <= max_steps; ++step) {
    Eigen::VectorXd a, d;
    h.direction(a, d);

    std::vector<bool> in_active(m, false);
    for (auto c : h.active) in_active[c] = true;

    // Correlations of inactive penalized columns along the segment:
    // ĉ_j(λ) = α_j + λ γ_j; entry when |ĉ_j| = λ.
    double next = 0.0;
    struct Event {
      Eigen::Index column;
      bool entering;
      double sign;
      double at;
    };
    std::vector<Event> events;
    for (Eigen::Index c = 0; c < m; ++c) {
      if (in_active[c] || h.is_free[c]) continue;
      double alpha = h.corr(c);
      double gamma = 0.0;
      for (std::size_t i = 0; i < h.active.size(); ++i) {
        alpha -= h.gram(c, h.active[i]) * a(static_cast<Eigen::Index>(i));
        gamma += h.gram(c, h.active[i]) * d(static_cast<Eigen::Index>(i));
      }
      alpha *= 2.0;
      gamma *= 2.0;
      if (!std::isfinite(lambda)) {
        // First knot: the path starts where the largest correlation equals λ.
        events.push_back({c, true, alpha >= 0.0 ? 1.0 : -1.0, std::abs(alpha)});
        continue;
      }
      if (c == just_dropped) continue;
      for (double s : {1.0, -1.0}) {
        const double denom = s - gamma;
        if (denom == 0.0) continue;
        const double at = alpha / denom;
        if (at > 0.0 && at < lambda * (1.0 - kTieTolerance)) events.push_back({c, true, s, at});
      }
    }
    for (std::size_t i = 0; i < h.active.size(); ++i) {
      const auto c = h.active[i];
      if (h.is_free[c] || !std::isfinite(lambda)) continue;
      const auto ii = static_cast<Eigen::Index>(i);
      if (d(ii) == 0.0) continue;
      const double at = a(ii) / d(ii);
      if (at > 0.0 && at < lambda * (1.0 - kTieTolerance)) events.push_back({c, false, 0.0, at});
    }
    for (const auto& e : events) next = std::max(next, e.at);

    if (next <= 0.0) {
      // Last segment reaches λ₀ = 0. With every work column active the
      // endpoint is the unpenalized minimizer θ̃ itself.
      record(0.0, a, {});
      if (h.active.size() == static_cast<std::size_t>(m)) {
        for (auto c : h.active) path.coefficients.back()(work[c]) = theta_tilde(work[c]);
        path.active_sets.back() = nonzero(path.coefficients.back());
        path.df.back() = static_cast<int>(path.active_sets.back().size());
      }
      return path;
    }

    std::vector<Eigen::Index> dropping;
    std::vector<const Event*> entering;
    for (const auto& e : events) {
      if (e.at < next * (1.0 - kTieTolerance)) continue;
      if (e.entering) {
        entering.push_back(&e);
      } else {
        dropping.push_back(e.column);
      }
    }
    record(next, a - next * d, dropping);

    just_dropped = -1;
    for (auto c : dropping) {
      h.active.erase(std::find(h.active.begin(), h.active.end(), c));
      h.sign[c] = 0.0;
      just_dropped = c;
    }
    for (const auto* e : entering) {
      h.active.push_back(e->column);
      h.sign[e->column] = e->sign;
    }
    std::sort(h.active.begin(), h.active.end());
    lambda = next;
  }
  throw NumericalError("LARS path did not terminate");
}

Eigen::VectorXd LassoPath::coefficients_at(double lambda0) const {
  if (knots.empty()) throw InputError("empty path");
  if (lambda0 >= knots.front()) return coefficients.front();
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (lambda0 >= knots[i]) {
      const double span = knots[i - 1] - knots[i];
      const double t = (lambda0 - knots[i]) / span;
      return (1.0 - t) * coefficients[i] + t * coefficients[i - 1];
    }
  }
  return coefficients.back();
}

double kkt_violation(const Eigen::MatrixXd& precision, const Eigen::VectorXd& theta_tilde,
                     const LassoPath& path, double lambda0, const Eigen::VectorXd& theta) {
  const Eigen::VectorXd grad = 2.0 * precision * (theta - theta_tilde);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    const double w = path.weights(j);
    double v;
    if (std::isinf(w)) {
      v = std::abs(theta(j));
    } else if (w == 0.0) {
      v = std::abs(grad(j));
    } else if (theta(j) != 0.0) {
      v = std::abs(grad(j) + lambda0 * w * (theta(j) > 0.0 ? 1.0 : -1.0));
    } else {
      v = std::max(0.0, std::abs(grad(j)) - lambda0 * w);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace dlsa
