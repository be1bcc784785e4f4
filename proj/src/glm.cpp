#include "dlsa/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "dlsa/errors.hpp"
#include "dlsa/linalg.hpp"
#include "glm_internal.hpp"

namespace dlsa {

// ---------------------------------------------------------------------------
// ModelFamily

ModelFamily ModelFamily::cox(TieMethod) { return ModelFamily(FamilyKind::cox, 0); }

ModelFamily ModelFamily::ordered_probit(int num_levels) {
  if (num_levels < 2) throw ConfigError("ordered-probit needs at least 2 levels");
  return ModelFamily(FamilyKind::ordered_probit, num_levels - 1);
}

ModelFamily ModelFamily::from_tag(std::uint16_t kind, std::uint16_t num_cutpoints) {
  switch (static_cast<FamilyKind>(kind)) {
    case FamilyKind::linear:
    case FamilyKind::logistic:
    case FamilyKind::poisson:
    case FamilyKind::cox:
      if (num_cutpoints != 0) throw InputError("cutpoints given for a non-ordinal family");
      return ModelFamily(static_cast<FamilyKind>(kind), 0);
    case FamilyKind::ordered_probit:
      if (num_cutpoints < 1) throw InputError("ordered-probit tag without cutpoints");
      return ModelFamily(FamilyKind::ordered_probit, num_cutpoints);
  }
  throw InputError("unknown family tag " + std::to_string(kind));
}

ModelFamily ModelFamily::parse(std::string_view name, int num_levels) {
  if (name == "linear") return linear();
  if (name == "logistic") return logistic();
  if (name == "poisson") return poisson();
  if (name == "cox") return cox();
  if (name == "ordered-probit") return ordered_probit(num_levels);
  throw ConfigError("unknown family '" + std::string(name) + "'");
}

std::optional<TieMethod> ModelFamily::tie_method() const noexcept {
  if (kind_ == FamilyKind::cox) return TieMethod::breslow;
  return std::nullopt;
}

std::string_view ModelFamily::name() const noexcept {
  switch (kind_) {
    case FamilyKind::linear: return "linear";
    case FamilyKind::logistic: return "logistic";
    case FamilyKind::poisson: return "poisson";
    case FamilyKind::cox: return "cox";
    case FamilyKind::ordered_probit: return "ordered-probit";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// DataPartition

DataPartition::DataPartition(std::uint64_t id, Eigen::MatrixXd covariates, Eigen::VectorXd response)
    : id_(id), covariates_(std::move(covariates)), response_(std::move(response)) {
  if (covariates_.rows() != response_.size()) {
    throw DimensionMismatch("covariate rows and response length differ");
  }
}

DataPartition DataPartition::survival(std::uint64_t id, Eigen::MatrixXd covariates,
                                      Eigen::VectorXd time, Eigen::VectorXd event) {
  if (event.size() != time.size()) throw DimensionMismatch("time and event lengths differ");
  DataPartition d(id, std::move(covariates), std::move(time));
  d.event_ = std::move(event);
  return d;
}

void DataPartition::validate(const ModelFamily& family) const {
  const auto n = rows();
  const auto needed = family.num_params(cols()) + 1;
  if (n < needed) {
    throw TooFewRows("partition " + std::to_string(id_) + " has " + std::to_string(n) +
                     " rows; needs at least " + std::to_string(needed));
  }
  if (!covariates_.allFinite() || !response_.allFinite()) {
    throw InputError("partition " + std::to_string(id_) + " contains non-finite values");
  }
  const auto bad = [&](const std::string& what) {
    return InputError("partition " + std::to_string(id_) + ": " + what);
  };
  switch (family.kind()) {
    case FamilyKind::linear:
      break;
    case FamilyKind::logistic:
      for (Eigen::Index i = 0; i < n; ++i) {
        if (response_(i) != 0.0 && response_(i) != 1.0) throw bad("logistic response must be 0/1");
      }
      break;
    case FamilyKind::poisson:
      for (Eigen::Index i = 0; i < n; ++i) {
        const double y = response_(i);
        if (y < 0.0 || y != std::floor(y)) throw bad("poisson response must be a count");
      }
      break;
    case FamilyKind::cox:
      if (!has_event()) throw bad("cox data needs event flags");
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!(response_(i) > 0.0)) throw bad("survival times must be positive");
        if (event_(i) != 0.0 && event_(i) != 1.0) throw bad("event flags must be 0/1");
      }
      break;
    case FamilyKind::ordered_probit: {
      const int levels = family.num_levels();
      for (Eigen::Index i = 0; i < n; ++i) {
        const double y = response_(i);
        if (y != std::floor(y) || y < 1.0 || y > levels) {
          throw bad("ordinal response outside 1.." + std::to_string(levels));
        }
      }
      break;
    }
  }
}

DataPartition DataPartition::permuted(std::span<const Eigen::Index> order) const {
  const auto n = static_cast<Eigen::Index>(order.size());
  Eigen::MatrixXd x(n, cols());
  Eigen::VectorXd y(n);
  Eigen::VectorXd e(has_event() ? n : 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i) = covariates_.row(order[i]);
    y(i) = response_(order[i]);
    if (has_event()) e(i) = event_(order[i]);
  }
  if (has_event()) return survival(id_, std::move(x), std::move(y), std::move(e));
  return DataPartition(id_, std::move(x), std::move(y));
}

DataPartition pool(std::span<const DataPartition> parts, std::uint64_t id) {
  if (parts.empty()) throw InputError("nothing to pool");
  Eigen::Index n = 0;
  const auto p = parts.front().cols();
  const bool events = parts.front().has_event();
  for (const auto& part : parts) {
    if (part.cols() != p || part.has_event() != events) {
      throw DimensionMismatch("partitions disagree on layout");
    }
    n += part.rows();
  }
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  Eigen::VectorXd e(events ? n : 0);
  Eigen::Index at = 0;
  for (const auto& part : parts) {
    x.middleRows(at, part.rows()) = part.covariates();
    y.segment(at, part.rows()) = part.response();
    if (events) e.segment(at, part.rows()) = part.event();
    at += part.rows();
  }
  if (events) return DataPartition::survival(id, std::move(x), std::move(y), std::move(e));
  return DataPartition(id, std::move(x), std::move(y));
}

// ---------------------------------------------------------------------------
// ParamVector / LocalSummary

Eigen::VectorXd ParamVector::stacked() const {
  Eigen::VectorXd v(size());
  v << coefficients, cutpoints;
  return v;
}

ParamVector ParamVector::from_stacked(const Eigen::VectorXd& v, Eigen::Index num_cutpoints) {
  if (num_cutpoints < 0 || num_cutpoints > v.size()) {
    throw DimensionMismatch("bad cutpoint count for stacked vector");
  }
  const auto p = v.size() - num_cutpoints;
  return ParamVector(v.head(p), v.tail(num_cutpoints));
}

bool ParamVector::cutpoints_increasing() const noexcept {
  for (Eigen::Index i = 1; i < cutpoints.size(); ++i) {
    if (!(cutpoints(i) > cutpoints(i - 1))) return false;
  }
  return true;
}

LocalSummary::LocalSummary(ModelFamily family, std::uint64_t partition_id, std::uint64_t n,
                           ParamVector theta_hat, const Eigen::MatrixXd& precision)
    : family_(family),
      partition_id_(partition_id),
      n_(n),
      theta_hat_(std::move(theta_hat)),
      precision_(linalg::symmetrize(precision)) {
  const auto q = theta_hat_.size();
  if (precision_.rows() != q || precision_.cols() != q) {
    throw DimensionMismatch("precision is not q x q");
  }
  if (theta_hat_.cutpoints.size() != family_.num_cutpoints()) {
    throw DimensionMismatch("cutpoint count does not match family");
  }
  if (n_ == 0) throw InputError("summary with zero samples");
  if (!theta_hat_.coefficients.allFinite() || !theta_hat_.cutpoints.allFinite()) {
    throw NumericalError("non-finite local estimate");
  }
  if (!linalg::is_positive_definite(precision_)) {
    throw NonPositiveDefinite("local precision of partition " + std::to_string(partition_id) +
                              " is not positive definite");
  }
}

bool operator==(const LocalSummary& a, const LocalSummary& b) {
  return a.family_ == b.family_ && a.partition_id_ == b.partition_id_ && a.n_ == b.n_ &&
         a.theta_hat_.coefficients == b.theta_hat_.coefficients &&
         a.theta_hat_.cutpoints == b.theta_hat_.cutpoints && a.precision_ == b.precision_;
}

// ---------------------------------------------------------------------------
// Loss evaluation

namespace detail {

Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& x, const Eigen::VectorXd& w) {
  const Eigen::MatrixXd wx = x.array().colwise() * w.array();
  return linalg::symmetrize(wx.transpose() * x);
}

namespace {

void check_dims(const ModelFamily& family, const ParamVector& theta, const DataPartition& data) {
  if (theta.coefficients.size() != data.cols()) {
    throw DimensionMismatch("coefficient length " + std::to_string(theta.coefficients.size()) +
                            " vs " + std::to_string(data.cols()) + " covariates");
  }
  if (theta.cutpoints.size() != family.num_cutpoints()) {
    throw DimensionMismatch("cutpoint length does not match family");
  }
  if (data.rows() == 0) throw DimensionMismatch("empty partition");
}

double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

Evaluation evaluate_linear(const ParamVector& theta, const DataPartition& data, Order order) {
  const auto& x = data.covariates();
  const double n = static_cast<double>(data.rows());
  const Eigen::VectorXd residual = x * theta.coefficients - data.response();
  Evaluation out;
  out.value = 0.5 * residual.squaredNorm() / n;
  if (order >= Order::gradient) out.gradient = x.transpose() * residual / n;
  if (order == Order::hessian) {
    out.hessian = linalg::symmetrize(x.transpose() * x / n);
  }
  return out;
}

// Logistic and poisson share the shape value = mean(b(η) - yη), gradient
// Xᵀ(b'(η) - y)/n, Hessian Xᵀ diag(b''(η)) X / n, evaluated at the clamped η.
template <class Cumulant, class Mean, class Variance>
Evaluation evaluate_canonical(const ParamVector& theta, const DataPartition& data, Order order,
                              Cumulant b, Mean mean, Variance variance, bool poisson) {
  const auto& x = data.covariates();
  const auto& y = data.response();
  const auto n = data.rows();
  const Eigen::VectorXd eta = (x * theta.coefficients).unaryExpr(&clamp_link);
  Evaluation out;
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    total += b(eta(i)) - y(i) * eta(i);
    if (poisson) total += std::lgamma(y(i) + 1.0);
  }
  const double nd = static_cast<double>(n);
  out.value = total / nd;
  if (order >= Order::gradient) {
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) r(i) = mean(eta(i)) - y(i);
    out.gradient = x.transpose() * r / nd;
  }
  if (order == Order::hessian) {
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w(i) = variance(eta(i)) / nd;
    out.hessian = weighted_gram(x, w);
  }
  return out;
}

}  // namespace

Evaluation evaluate(const ModelFamily& family, const ParamVector& theta, const DataPartition& data,
                    Order order) {
  check_dims(family, theta, data);
  switch (family.kind()) {
    case FamilyKind::linear:
      return evaluate_linear(theta, data, order);
    case FamilyKind::logistic:
      return evaluate_canonical(
          theta, data, order, softplus, sigmoid,
          [](double t) {
            const double s = sigmoid(t);
            return s * (1.0 - s);
          },
          false);
    case FamilyKind::poisson: {
      const auto e = [](double t) { return std::exp(t); };
      return evaluate_canonical(theta, data, order, e, e, e, true);
    }
    case FamilyKind::cox:
      return evaluate_cox(theta, data, order);
    case FamilyKind::ordered_probit:
      return evaluate_ordered_probit(family, theta, data, order);
  }
  throw ConfigError("unhandled family");
}

}  // namespace detail

double loss(const ModelFamily& family, const ParamVector& theta, const DataPartition& data) {
  return detail::evaluate(family, theta, data, detail::Order::value).value;
}

Eigen::VectorXd gradient(const ModelFamily& family, const ParamVector& theta,
                         const DataPartition& data) {
  return detail::evaluate(family, theta, data, detail::Order::gradient).gradient;
}

Eigen::MatrixXd hessian(const ModelFamily& family, const ParamVector& theta,
                        const DataPartition& data) {
  return detail::evaluate(family, theta, data, detail::Order::hessian).hessian;
}

// ---------------------------------------------------------------------------
// Newton fit

ParamVector default_init(const ModelFamily& family, const DataPartition& data) {
  ParamVector init(Eigen::VectorXd::Zero(data.cols()));
  if (family.kind() != FamilyKind::ordered_probit) return init;

  const int levels = family.num_levels();
  std::vector<double> counts(levels, 0.0);
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    counts[static_cast<std::size_t>(data.response()(i)) - 1] += 1.0;
  }
  for (int l = 0; l < levels; ++l) {
    if (counts[l] == 0.0) {
      throw InputError("partition " + std::to_string(data.id()) + ": ordinal level " +
                       std::to_string(l + 1) + " is never observed");
    }
  }
  const boost::math::normal standard;
  init.cutpoints.resize(levels - 1);
  double cumulative = 0.0;
  for (int l = 0; l + 1 < levels; ++l) {
    cumulative += counts[l];
    init.cutpoints(l) = boost::math::quantile(standard, cumulative / data.rows());
  }
  return init;
}

LocalSummary fit_local(const ModelFamily& family, const DataPartition& data,
                       const std::optional<ParamVector>& init, const NewtonOptions& options) {
  using detail::Order;
  data.validate(family);
  ParamVector theta = init ? *init : default_init(family, data);
  if (!theta.cutpoints_increasing()) throw InputError("initial cutpoints must be increasing");

  const auto ncut = family.num_cutpoints();
  auto current = detail::evaluate(family, theta, data, Order::hessian);

  for (int iter = 0; iter <= options.max_iterations; ++iter) {
    const double grad_norm = current.gradient.lpNorm<Eigen::Infinity>();
    if (grad_norm <= options.gradient_tolerance) {
      return LocalSummary(family, data.id(), static_cast<std::uint64_t>(data.rows()),
                          std::move(theta), static_cast<double>(data.rows()) * current.hessian);
    }
    if (iter == options.max_iterations) break;
    if (!std::isfinite(current.value) || !current.gradient.allFinite()) {
      throw NonConvergence("non-finite loss on partition " + std::to_string(data.id()));
    }

    const Eigen::VectorXd step = linalg::cholesky_solve_or_throw(current.hessian, -current.gradient);
    const Eigen::VectorXd base = theta.stacked();
    const double slack = 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(current.value));

    bool accepted = false;
    bool order_broken = false;
    double t = 1.0;
    for (int h = 0; h <= options.max_halvings; ++h, t *= 0.5) {
      ParamVector candidate = ParamVector::from_stacked(base + t * step, ncut);
      if (!candidate.cutpoints_increasing()) {
        order_broken = true;
        continue;
      }
      const double value = detail::evaluate(family, candidate, data, Order::value).value;
      if (!std::isfinite(value)) continue;
      bool ok = value < current.value;
      auto next = detail::Evaluation{};
      if (!ok && value <= current.value + slack) {
        // Rounding-level change in the loss: accept only if the gradient shrinks.
        next = detail::evaluate(family, candidate, data, Order::hessian);
        ok = next.gradient.lpNorm<Eigen::Infinity>() < grad_norm;
      }
      if (ok) {
        theta = std::move(candidate);
        current = next.hessian.size() ? std::move(next)
                                      : detail::evaluate(family, theta, data, Order::hessian);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw NonConvergence(order_broken
                               ? "Newton step breaks cutpoint ordering on partition " +
                                     std::to_string(data.id())
                               : "line search exhausted on partition " + std::to_string(data.id()));
    }
  }
  throw NonConvergence("iteration cap reached on partition " + std::to_string(data.id()));
}

}  // namespace dlsa
