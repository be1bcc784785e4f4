#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dlsa/glm.hpp"

namespace dlsa::wire {

/// Binary summary envelope, all fields little-endian:
///
///   offset  size  field
///        0     4  magic "DLSA"
///        4     4  u32 schema_version
///        8     2  u16 family kind
///       10     2  u16 number of cutpoints
///       12     4  u32 q
///       16     8  u64 partition_id
///       24     8  u64 n_k
///       32    8q  f64 θ̂_k (coefficients then cutpoints)
///    32+8q  8q²  f64 precision n_k Σ̂_k⁻¹, full matrix, row-major
///      end-8   8  u64 FNV-1a 64 of every preceding byte
inline constexpr std::uint32_t kSchemaVersion = 1;
inline constexpr std::array<std::uint8_t, 4> kMagic = {'D', 'L', 'S', 'A'};

using Bytes = std::vector<std::uint8_t>;

/// 8q² + 8q + 40.
constexpr std::size_t encoded_size(std::size_t q) noexcept { return 8 * q * q + 8 * q + 40; }

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) noexcept;

Bytes encode(const LocalSummary& summary);

/// Throws InputError on truncation, bad magic or version, ChecksumMismatch on
/// a corrupted payload, and NonPositiveDefinite if the precision is not PD.
LocalSummary decode(std::span<const std::uint8_t> bytes);

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
Bytes read_file(const std::filesystem::path& path);

}  // namespace dlsa::wire
