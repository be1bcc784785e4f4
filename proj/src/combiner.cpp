#include "dlsa/combiner.hpp"

#include <algorithm>
#include <string>
#include <thread>
#include <vector>

#include "dlsa/errors.hpp"
#include "dlsa/linalg.hpp"

namespace dlsa {
namespace {

void check_summaries(std::span<const LocalSummary> summaries) {
  if (summaries.empty()) throw InputError("no local summaries to combine");
  const auto& first = summaries.front();
  for (const auto& s : summaries) {
    if (s.q() != first.q() || !(s.family() == first.family())) {
      throw DimensionMismatch("summary " + std::to_string(s.partition_id()) +
                              " disagrees with the first summary on family or dimension");
    }
  }
}

std::uint64_t total_samples(std::span<const LocalSummary> summaries) {
  std::uint64_t n = 0;
  for (const auto& s : summaries) n += s.n();
  return n;
}

}  // namespace

CombinedFit combine_wlse(std::span<const LocalSummary> summaries) {
  check_summaries(summaries);
  const auto q = summaries.front().q();
  const auto ncut = summaries.front().family().num_cutpoints();

  // Precisions already carry n_k, so no α_k is ever formed.
  Eigen::MatrixXd total_precision = Eigen::MatrixXd::Zero(q, q);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(q);
  for (const auto& s : summaries) {
    total_precision += s.precision();
    rhs.noalias() += s.precision() * s.theta_hat().stacked();
  }
  total_precision = linalg::symmetrize(total_precision);

  const auto solved = linalg::spd_solve(total_precision, rhs);
  const auto n = total_samples(summaries);

  CombinedFit fit;
  fit.family = summaries.front().family();
  fit.theta_tilde = ParamVector::from_stacked(solved.solution.col(0), ncut);
  fit.precision = total_precision / static_cast<double>(n);
  fit.covariance = linalg::symmetrize(
      linalg::spd_solve(fit.precision, Eigen::MatrixXd::Identity(q, q)).solution);
  fit.total_n = n;
  fit.k = summaries.size();
  fit.pseudo_inverse_used = solved.pseudo_inverse_used;
  return fit;
}

ParamVector combine_os(std::span<const LocalSummary> summaries) {
  check_summaries(summaries);
  const auto q = summaries.front().q();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(q);
  for (const auto& s : summaries) acc += static_cast<double>(s.n()) * s.theta_hat().stacked();
  acc /= static_cast<double>(total_samples(summaries));
  return ParamVector::from_stacked(acc, summaries.front().family().num_cutpoints());
}

ParamVector combine_csl(std::span<const LocalSummary> summaries,
                        std::span<const DataPartition> partitions, const ModelFamily& family,
                        unsigned threads) {
  check_summaries(summaries);
  if (partitions.size() != summaries.size()) {
    throw DimensionMismatch("CSL needs one partition per summary");
  }
  for (std::size_t k = 0; k < partitions.size(); ++k) {
    if (summaries[k].partition_id() != partitions[k].id()) {
      throw InputError("CSL summaries and partitions are not in the same order");
    }
  }
  const ParamVector& start = summaries.front().theta_hat();
  const auto q = start.size();

  std::vector<Eigen::VectorXd> local_grads(partitions.size());
  const auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t k = begin; k < partitions.size(); k += step) {
      local_grads[k] = gradient(family, start, partitions[k]);
    }
  };
  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(partitions.size()));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }

  Eigen::VectorXd global_grad = Eigen::VectorXd::Zero(q);
  double total = 0.0;
  for (std::size_t k = 0; k < partitions.size(); ++k) {
    const double nk = static_cast<double>(partitions[k].rows());
    global_grad += nk * local_grads[k];
    total += nk;
  }
  global_grad /= total;

  const Eigen::MatrixXd master_hessian = summaries.front().precision() / static_cast<double>(summaries.front().n());
  const Eigen::VectorXd step = linalg::cholesky_solve_or_throw(master_hessian, global_grad);
  return ParamVector::from_stacked(start.stacked() - step, family.num_cutpoints());
}

}  // namespace dlsa
