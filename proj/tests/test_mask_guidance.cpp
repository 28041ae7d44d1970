#include <gtest/gtest.h>

#include <cmath>

#include "noiseloom/attention.hpp"
#include "noiseloom/error.hpp"
#include "noiseloom/mask_guidance.hpp"

using namespace noiseloom;

namespace {

const std::vector<std::string> kPrompt = {"dog", "cat"};
const BlockGrid kGrid{16, 16};

LayoutGuidance dog_box() {
  LayoutGuidance g;
  g.items = {{{3, 4, 8, 10}, "dog"}};
  return g;
}

}  // namespace

TEST(PaintBias, Construction) {
  const auto t = TokenSet::for_prompt(kPrompt, 1, 2.0);
  EXPECT_EQ(paint_bias(dog_box(), t, kGrid, 0.0).nonzero(), 0);
  const auto b = paint_bias(dog_box(), t, kGrid, 1.0);
  EXPECT_EQ(b.nonzero(), 30);
  for (int blk = 0; blk < 256; ++blk)
    for (int k = 0; k < t.size(); ++k) {
      const bool in = k == 1 && Region{3, 4, 8, 10}.contains(kGrid.coord(blk));
      EXPECT_EQ(b.at(blk, k), in ? 1.0 : 0.0);
    }
  EXPECT_THROW(paint_bias(dog_box(), t, kGrid, -0.1), ConfigError);
}

TEST(SoftBias, ReductionAndSigns) {
  const auto t = TokenSet::for_prompt(kPrompt, 1, 2.0);
  EXPECT_EQ(soft_bias(dog_box(), t, kGrid, 1.5, 0.0).values, paint_bias(dog_box(), t, kGrid, 1.5).values);
  const auto b = soft_bias(dog_box(), t, kGrid, 1.0, -1.0);
  EXPECT_EQ(b.nonzero(), 256);
  for (int blk = 0; blk < 256; ++blk) {
    EXPECT_EQ(b.at(blk, 0), 0.0);  // background column untouched
    EXPECT_EQ(b.at(blk, 2), 0.0);  // cat is not guided
  }
  EXPECT_THROW(soft_bias(dog_box(), t, kGrid, 1.0, 0.5), ConfigError);
  EXPECT_THROW(soft_bias(dog_box(), t, kGrid, -1.0, -0.5), ConfigError);
}

TEST(Defaults, HalfLogGridArea) {
  EXPECT_NEAR(default_weight_in(kGrid), 0.5 * std::log(256.0), 1e-15);
  EXPECT_NEAR(default_weight_in(kGrid), 2.772588722239781, 1e-12);
  EXPECT_EQ(default_weight_out(2.0), -1.0);
}

TEST(BiasEffect, PaintRaisesInsideSoftLowersOutside) {
  const auto t = TokenSet::for_prompt(kPrompt, 1, 2.0);
  const auto w = ProjectionWeights::frozen(1);
  const auto f = block_features(sample_latent(64, 64, 4, 4));
  const auto base = cross_attention(f, t, w);
  const auto paint = cross_attention(f, t, w, paint_bias(dog_box(), t, kGrid, 1.0).span());
  const auto soft = cross_attention(f, t, w, soft_bias(dog_box(), t, kGrid, 1.0, -1.0).span());
  const Region r{3, 4, 8, 10};
  for (int b = 0; b < 256; ++b) {
    if (r.contains(kGrid.coord(b))) {
      EXPECT_GT(paint.at(b, 1), base.at(b, 1));
    } else {
      EXPECT_EQ(paint.at(b, 1), base.at(b, 1));
      EXPECT_LT(soft.at(b, 1), base.at(b, 1));
    }
    double s = 0;
    for (double v : soft.row(b)) s += v;
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(BiasEffect, InRegionMassMonotoneInWeight) {
  const auto t = TokenSet::for_prompt(kPrompt, 1, 2.0);
  const auto w = ProjectionWeights::frozen(1);
  const auto f = block_features(sample_latent(64, 64, 4, 4));
  double prev = -1;
  for (double win = 0.0; win <= 4.0; win += 0.5) {
    const auto m = cross_attention(f, t, w, paint_bias(dog_box(), t, kGrid, win).span());
    double mass = 0;
    for (int b = 0; b < 256; ++b)
      if (Region{3, 4, 8, 10}.contains(kGrid.coord(b))) mass += m.at(b, 1);
    EXPECT_GE(mass, prev);
    prev = mass;
  }
}

TEST(BiasEffect, CommutesWithPermutation) {
  const auto t = TokenSet::for_prompt(kPrompt, 1, 2.0);
  const auto w = ProjectionWeights::frozen(1);
  const auto z = sample_latent(64, 64, 4, 6);
  const auto bias = soft_bias(dog_box(), t, kGrid, 2.0, -1.0);
  SwapList s;
  s.pairs = {{{0, 0}, {4, 5}}, {{15, 15}, {7, 7}}, {{1, 9}, {2, 3}}};
  const auto lhs = cross_attention(block_features(apply_block_permutation(z, s)), t, w,
                                   permute_bias(bias, s).span());
  const auto rhs = permute_rows(cross_attention(block_features(z), t, w, bias.span()), s);
  EXPECT_EQ(lhs.values, rhs.values);
}
