#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dlsa/glm.hpp"
#include "dlsa/ingest.hpp"

namespace dlsa::io {

enum class PartitionStrategy { round_robin, contiguous, by_column };

struct PartitionPlan {
  PartitionStrategy strategy = PartitionStrategy::round_robin;
  std::string key_column;  // by-column only

  /// "round-robin", "contiguous" or "by-column:<col>"; ConfigError otherwise.
  static PartitionPlan parse(std::string_view text);
  std::string to_string() const;
};

/// Row indices of each of the K partitions, every list ascending.
///
/// round-robin: a seeded Fisher-Yates shuffle, then position i goes to i mod K.
/// contiguous: consecutive blocks, the first N mod K one row longer.
/// by-column: distinct keys sorted, the i-th key goes to partition i mod K;
///   ConfigError when there are fewer distinct keys than K.
std::vector<std::vector<Eigen::Index>> partition_rows(Eigen::Index rows, std::uint64_t k,
                                                      const PartitionPlan& plan,
                                                      std::uint64_t seed,
                                                      std::span<const std::string> key = {});

/// Splits a dataset into K partitions with ids 0..K-1.
/// Throws TooFewRows unless rows >= K(q+1) and every partition has > q rows.
std::vector<DataPartition> partition_input(const Dataset& data, std::uint64_t k,
                                           const PartitionPlan& plan, std::uint64_t seed,
                                           Eigen::Index q);

}  // namespace dlsa::io
