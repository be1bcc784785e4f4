#include "dlsa/partition.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "dlsa/errors.hpp"
#include "dlsa/random.hpp"

namespace dlsa::io {
namespace {

constexpr std::uint64_t kShuffleStream = stream_id(0, 0, 2);

// Unbiased draw from [0, bound) by rejection.
std::uint64_t uniform_below(Philox4x32& rng, std::uint64_t bound) {
  const std::uint64_t limit = Philox4x32::max() - Philox4x32::max() % bound;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % bound;
}

}  // namespace

PartitionPlan PartitionPlan::parse(std::string_view text) {
  PartitionPlan plan;
  constexpr std::string_view by_column = "by-column:";
  if (text == "round-robin") {
    plan.strategy = PartitionStrategy::round_robin;
  } else if (text == "contiguous") {
    plan.strategy = PartitionStrategy::contiguous;
  } else if (text.starts_with(by_column) && text.size() > by_column.size()) {
    plan.strategy = PartitionStrategy::by_column;
    plan.key_column = std::string(text.substr(by_column.size()));
  } else {
    throw ConfigError("unknown partition strategy '" + std::string(text) + "'");
  }
  return plan;
}

std::string PartitionPlan::to_string() const {
  switch (strategy) {
    case PartitionStrategy::round_robin:
      return "round-robin";
    case PartitionStrategy::contiguous:
      return "contiguous";
    case PartitionStrategy::by_column:
      return "by-column:" + key_column;
  }
  return {};
}

std::vector<std::vector<Eigen::Index>> partition_rows(Eigen::Index rows, std::uint64_t k,
                                                      const PartitionPlan& plan,
                                                      std::uint64_t seed,
                                                      std::span<const std::string> key) {
  if (k == 0) throw ConfigError("K must be positive");
  std::vector<std::vector<Eigen::Index>> parts(k);
  switch (plan.strategy) {
    case PartitionStrategy::round_robin: {
      std::vector<Eigen::Index> order(static_cast<std::size_t>(rows));
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      Philox4x32 rng(seed, kShuffleStream);
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[uniform_below(rng, i)]);
      }
      for (std::size_t i = 0; i < order.size(); ++i) parts[i % k].push_back(order[i]);
      break;
    }
    case PartitionStrategy::contiguous: {
      const auto n = static_cast<std::uint64_t>(rows);
      Eigen::Index next = 0;
      for (std::uint64_t p = 0; p < k; ++p) {
        const auto size = static_cast<Eigen::Index>(n / k + (p < n % k ? 1 : 0));
        for (Eigen::Index i = 0; i < size; ++i) parts[p].push_back(next++);
      }
      break;
    }
    case PartitionStrategy::by_column: {
      if (static_cast<Eigen::Index>(key.size()) != rows) {
        throw DimensionMismatch("partition key has " + std::to_string(key.size()) + " values for " +
                                std::to_string(rows) + " rows");
      }
      std::map<std::string_view, std::uint64_t> levels;
      for (const auto& v : key) levels.emplace(v, 0);
      if (levels.size() < k) {
        throw ConfigError("key column '" + plan.key_column + "' has " + std::to_string(levels.size()) +
                          " distinct values, fewer than K = " + std::to_string(k));
      }
      std::uint64_t i = 0;
      for (auto& [level, target] : levels) target = i++ % k;
      for (Eigen::Index r = 0; r < rows; ++r) parts[levels.at(key[r])].push_back(r);
      break;
    }
  }
  for (auto& p : parts) std::sort(p.begin(), p.end());
  return parts;
}

std::vector<DataPartition> partition_input(const Dataset& data, std::uint64_t k,
                                           const PartitionPlan& plan, std::uint64_t seed,
                                           Eigen::Index q) {
  if (k == 0) throw ConfigError("K must be positive");
  const auto rows = data.rows();
  if (static_cast<std::uint64_t>(rows) < k * static_cast<std::uint64_t>(q + 1)) {
    throw TooFewRows(std::to_string(rows) + " rows cannot give " + std::to_string(k) +
                     " partitions at least " + std::to_string(q + 1) + " rows each");
  }
  const auto index = partition_rows(rows, k, plan, seed, data.key);
  std::vector<DataPartition> out;
  out.reserve(k);
  for (std::uint64_t p = 0; p < k; ++p) {
    const auto& idx = index[p];
    if (static_cast<Eigen::Index>(idx.size()) <= q) {
      throw TooFewRows("partition " + std::to_string(p) + " has " + std::to_string(idx.size()) +
                       " rows, needs more than " + std::to_string(q));
    }
    Eigen::MatrixXd x = data.covariates(idx, Eigen::all);
    Eigen::VectorXd y = data.response(idx);
    if (data.survival()) {
      Eigen::VectorXd e = data.event(idx);
      out.push_back(DataPartition::survival(p, std::move(x), std::move(y), std::move(e)));
    } else {
      out.emplace_back(p, std::move(x), std::move(y));
    }
  }
  return out;
}

}  // namespace dlsa::io
