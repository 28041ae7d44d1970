#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "noiseloom/error.hpp"
#include "noiseloom/latent.hpp"
#include "noiseloom/rng.hpp"
#include "oracles.hpp"

using namespace noiseloom;

TEST(SampleLatent, SameSeedIsBitwiseEqual) {
  const auto a = sample_latent(64, 64, 4, 7);
  const auto b = sample_latent(64, 64, 4, 7);
  EXPECT_TRUE(a.bitwise_equal(b));
  EXPECT_EQ(a.seed(), 7u);
  EXPECT_EQ(a.size(), 64u * 64 * 4);
}

TEST(SampleLatent, DifferentSeedsDifferAlmostEverywhere) {
  const auto a = sample_latent(64, 64, 4, 7);
  const auto b = sample_latent(64, 64, 4, 8);
  std::size_t differ = 0;
  for (std::size_t i = 0; i < a.size(); ++i) differ += a.values()[i] != b.values()[i];
  EXPECT_GT(static_cast<double>(differ) / a.size(), 0.99);
}

TEST(SampleLatent, Moments) {
  const auto z = sample_latent(64, 64, 4, 7);
  double s = 0, s2 = 0;
  for (const float v : z.values()) s += v;
  const double mean = s / z.size();
  for (const float v : z.values()) s2 += (v - mean) * (v - mean);
  const double var = s2 / (z.size() - 1);
  EXPECT_GT(mean, -0.05);
  EXPECT_LT(mean, 0.05);
  EXPECT_GT(var, 0.9);
  EXPECT_LT(var, 1.1);
}

TEST(SampleLatent, ValueIsNormalAtFlatIndex) {
  const auto z = sample_latent(8, 8, 4, 99);
  const CounterRng rng(99, StreamTag::latent);
  for (std::size_t i = 0; i < z.size(); ++i)
    ASSERT_EQ(z.values()[i], static_cast<float>(rng.normal(i)));
}

TEST(SampleLatent, GeometryErrors) {
  EXPECT_THROW(sample_latent(63, 64, 4, 1), GeometryError);
  EXPECT_THROW(sample_latent(64, 62, 4, 1), GeometryError);
  EXPECT_THROW(sample_latent(0, 64, 4, 1), GeometryError);
  EXPECT_THROW(sample_latent(64, 64, 0, 1), GeometryError);
}

TEST(RegionMask, PixelRectRoundsOutward) {
  const BlockGrid g{16, 16};
  const auto m = RegionMask::from_pixel_rect(g, 4, 5, 5, 9, 9);  // rows/cols 1..2
  EXPECT_EQ(m.count(), 4);
  EXPECT_TRUE(m.test({1, 1}));
  EXPECT_TRUE(m.test({2, 2}));
  EXPECT_FALSE(m.test({3, 3}));
  const auto exact = RegionMask::from_pixel_rect(g, 4, 4, 4, 8, 8);
  EXPECT_EQ(exact.count(), 1);
}

TEST(ResampleRegion, OneBlockChangesExactlyItsValues) {
  const auto z = sample_latent(64, 64, 4, 1);
  RegionMask mask(z.blocks());
  mask.set({3, 5});
  const auto out = resample_region(z, mask, 1234);
  int changed = 0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      for (int c = 0; c < 4; ++c) {
        const bool inside = y / 4 == 3 && x / 4 == 5;
        if (z.at(y, x, c) != out.at(y, x, c)) {
          ++changed;
          EXPECT_TRUE(inside);
        }
      }
  EXPECT_EQ(changed, 4 * 4 * 4);
  EXPECT_TRUE(z.bitwise_equal(sample_latent(64, 64, 4, 1)));  // input intact
}

TEST(ResampleRegion, DeterministicAndFullMaskMatchesFreshSample) {
  const auto z = sample_latent(32, 32, 4, 1);
  RegionMask full(z.blocks());
  full.add({0, 0, 8, 8});
  const auto a = resample_region(z, full, 55);
  EXPECT_TRUE(a.bitwise_equal(resample_region(z, full, 55)));
  EXPECT_TRUE(a.bitwise_equal(sample_latent(32, 32, 4, 55)));
}

TEST(ResampleRegion, EmptyMaskAndGridMismatch) {
  const auto z = sample_latent(32, 32, 4, 1);
  EXPECT_THROW(resample_region(z, RegionMask(z.blocks()), 1), DegenerateInputError);
  RegionMask wrong(BlockGrid{4, 4});
  wrong.set({0, 0});
  EXPECT_THROW(resample_region(z, wrong, 1), GeometryError);
}

TEST(BlockPermutation, EmptyIsIdentityAndDoubleIsInvolution) {
  const auto z = sample_latent(64, 64, 4, 5);
  EXPECT_TRUE(apply_block_permutation(z, {}).bitwise_equal(z));
  SwapList s;
  s.pairs = {{{0, 0}, {15, 15}}, {{3, 4}, {7, 2}}, {{1, 1}, {1, 2}}};
  const auto once = apply_block_permutation(z, s);
  EXPECT_FALSE(once.bitwise_equal(z));
  EXPECT_TRUE(apply_block_permutation(once, s).bitwise_equal(z));
}

TEST(BlockPermutation, BlocksMoveIntact) {
  const auto z = sample_latent(16, 16, 4, 5);
  SwapList s;
  s.pairs = {{{0, 1}, {3, 2}}};
  const auto out = apply_block_permutation(z, s);
  for (int dy = 0; dy < 4; ++dy)
    for (int dx = 0; dx < 4; ++dx)
      for (int c = 0; c < 4; ++c) {
        EXPECT_EQ(out.at(12 + dy, 8 + dx, c), z.at(dy, 4 + dx, c));
        EXPECT_EQ(out.at(dy, 4 + dx, c), z.at(12 + dy, 8 + dx, c));
      }
}

TEST(BlockPermutation, MultisetPreservedOnRandomSwaps) {
  const auto z = sample_latent(64, 64, 4, 9);
  const CounterRng rng(9, StreamTag::bench);
  std::uint64_t k = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> perm(256);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = 255; i > 0; --i) std::swap(perm[i], perm[rng.below(k++, i + 1)]);
    SwapList s;
    const int n = 1 + static_cast<int>(rng.below(k++, 100));
    for (int i = 0; i < n; ++i)
      s.pairs.push_back({{perm[2 * i] / 16, perm[2 * i] % 16}, {perm[2 * i + 1] / 16, perm[2 * i + 1] % 16}});
    const auto out = apply_block_permutation(z, s);
    EXPECT_EQ(oracle::sorted_values(out.values()), oracle::sorted_values(z.values()));
  }
}

TEST(BlockPermutation, Errors) {
  const auto z = sample_latent(16, 16, 4, 5);
  SwapList dup;
  dup.pairs = {{{0, 0}, {1, 1}}, {{1, 1}, {2, 2}}};
  EXPECT_THROW(apply_block_permutation(z, dup), InvalidPermutationError);
  SwapList self;
  self.pairs = {{{0, 0}, {0, 0}}};
  EXPECT_THROW(apply_block_permutation(z, self), InvalidPermutationError);
  SwapList out_of_range;
  out_of_range.pairs = {{{0, 0}, {4, 0}}};
  EXPECT_THROW(apply_block_permutation(z, out_of_range), GeometryError);
}

TEST(LatentFile, RoundTripAndHeader) {
  const auto z = sample_latent(16, 8, 4, 0xDEADBEEFCAFEULL);
  std::stringstream ss;
  write_latent(ss, z);
  const std::string bytes = ss.str();
  ASSERT_EQ(bytes.size(), 16 + z.size() * 4 + 8);
  EXPECT_EQ(bytes.substr(0, 4), "NLAT");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1);  // version, little-endian
  EXPECT_EQ(static_cast<unsigned char>(bytes[6]), 4);  // channels
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 16); // height
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 8); // width
  const auto back = read_latent(ss);
  EXPECT_TRUE(back.bitwise_equal(z));
  EXPECT_EQ(back.seed(), z.seed());
}

TEST(LatentFile, RejectsGarbage) {
  std::stringstream bad("NOPE000000000000");
  EXPECT_ANY_THROW(read_latent(bad));
  std::stringstream truncated;
  write_latent(truncated, sample_latent(8, 8, 4, 1));
  std::stringstream cut(truncated.str().substr(0, 40));
  EXPECT_ANY_THROW(read_latent(cut));
}
