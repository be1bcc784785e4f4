#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace dlsa {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11) exposed as a
/// 64-bit UniformRandomBitGenerator. A (key, stream) pair names an
/// independent substream; the low half of the counter walks within it.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept;

  /// The raw 10-round bijection.
  static Counter block(Counter counter, Key key) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept;

 private:
  Key key_;
  std::uint64_t stream_;
  std::uint64_t position_ = 0;  // block index within the stream
  Counter buffer_{};
  int used_ = 4;                // 32-bit words consumed from buffer_
};

/// Stream id for one (replication, worker, purpose) triple.
constexpr std::uint64_t stream_id(std::uint64_t replication, std::uint64_t worker,
                                  std::uint64_t purpose) noexcept {
  return (replication << 24) | ((worker & 0xFFFF) << 8) | (purpose & 0xFF);
}

}  // namespace dlsa
