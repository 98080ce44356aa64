#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace gapdecomp {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A generator is fully determined by (seed, stream): the 64-bit seed is the
/// key and the stream id occupies the upper half of the counter, so any
/// draw or cluster can own an independent sequence without coordination.
/// Satisfies UniformRandomBitGenerator.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ == 2) {
      const Block counter{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                          static_cast<std::uint32_t>(stream_),
                          static_cast<std::uint32_t>(stream_ >> 32)};
      buffer_ = generate(counter, key_);
      ++block_;
      pos_ = 0;
    }
    const auto lo = buffer_[2 * pos_];
    const auto hi = buffer_[2 * pos_ + 1];
    ++pos_;
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
  }

  /// Uniform double in the open interval (0, 1).
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  static Block generate(Block counter, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(0xD2511F53u) * counter[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(0xCD9E8D57u) * counter[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      counter = {hi1 ^ counter[1] ^ key[0], lo1, hi0 ^ counter[3] ^ key[1], lo0};
    }
    return counter;
  }

 private:
  Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Block buffer_{};
  int pos_ = 2;
};

}  // namespace gapdecomp
