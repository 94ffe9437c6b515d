#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "nuhlab/rng.hpp"

using namespace nuhlab;

// Known-answer vectors of the Random123 distribution (philox4x32, 10 rounds).
TEST(Philox, KnownAnswers) {
  using W = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}), (W{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
            (W{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
            (W{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Stream, DeterministicPerSeedAndTask) {
  Stream a(42, 3), b(42, 3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u32(), b.next_u32());
  EXPECT_NE(Stream(42, 3).next_u32(), Stream(42, 4).next_u32());
  EXPECT_NE(Stream(42, 3).next_u32(), Stream(43, 3).next_u32());
}

TEST(Stream, FirstWordsAreTheBlockAtCounterZero) {
  Stream s(5, 9);
  auto block = philox4x32_10({0, 0, 9, 0}, {5, 0});
  for (int i = 0; i < 4; ++i) EXPECT_EQ(s.next_u32(), block[static_cast<std::size_t>(i)]);
}

TEST(Stream, UniformRangeAndMean) {
  Stream s(1, 0);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
}
