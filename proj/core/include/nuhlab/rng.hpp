#pragma once

#include <array>
#include <cstdint>

namespace nuhlab {

/// Philox4x32-10 (Salmon et al., SC'11). Counter-based: the output block is a
/// pure function of (counter, key).
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

/// Substream (seed, task): draw i of the stream is word i % 4 of the block at
/// counter (i / 4, task), key = seed. Streams for different tasks never overlap.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t task) : seed_(seed), task_(task) {}

  std::uint32_t next_u32() {
    if (pos_ == 4) {
      block_ = philox4x32_10({static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32),
                              static_cast<std::uint32_t>(task_), static_cast<std::uint32_t>(task_ >> 32)},
                             {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
      ++index_;
      pos_ = 0;
    }
    return block_[pos_++];
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    std::uint64_t a = next_u32() >> 5, b = next_u32() >> 6;
    return (static_cast<double>(a) * 67108864.0 + static_cast<double>(b)) * (1.0 / 9007199254740992.0);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t seed_;
  std::uint64_t task_;
  std::uint64_t index_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int pos_ = 4;
};

}  // namespace nuhlab
