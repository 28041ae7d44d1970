#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "noiseloom/attention.hpp"
#include "noiseloom/error.hpp"
#include "noiseloom/rng.hpp"

using namespace noiseloom;

namespace {

const std::vector<std::string> kCats = {"dog", "cat", "car"};

double norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

SwapList random_swaps(std::uint64_t seed, int n) {
  const CounterRng r(seed, StreamTag::bench);
  std::vector<int> perm(256);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = 255; i > 0; --i) std::swap(perm[i], perm[r.below(i, i + 1)]);
  SwapList s;
  for (int i = 0; i < n; ++i)
    s.pairs.push_back({{perm[2 * i] / 16, perm[2 * i] % 16}, {perm[2 * i + 1] / 16, perm[2 * i + 1] % 16}});
  return s;
}

}  // namespace

TEST(TokenSet, EmbeddingsDeterministicUnitNorm) {
  const auto a = TokenSet::from_names(kCats, 5);
  const auto b = TokenSet::from_names(kCats, 5);
  const auto c = TokenSet::from_names(kCats, 6);
  for (int i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].embedding, b[i].embedding);
    EXPECT_NE(a[i].embedding, c[i].embedding);
    EXPECT_NEAR(norm(a[i].embedding), 1.0, 1e-12);
    EXPECT_EQ(a[i].embedding.size(), 16u);
  }
  // Embedding depends on the name only, not on position in the prompt.
  const std::vector<std::string> other = {"car", "dog"};
  EXPECT_EQ(TokenSet::from_names(other, 5)[1].embedding, a[0].embedding);
}

TEST(TokenSet, Validation) {
  const std::vector<std::string> dup = {"dog", "dog"};
  EXPECT_THROW(TokenSet::from_names(dup, 1), ConfigError);
  EXPECT_THROW(TokenSet({Token{"x", {1.0, 1.0}, 0.0}}), ConfigError);
  EXPECT_THROW(TokenSet({Token{"x", {1.0, 0.0}, 0.0}, Token{"y", {1.0}, 0.0}}), GeometryError);
  const std::vector<std::string> bad = {"<bg>"};
  EXPECT_THROW(TokenSet::for_prompt(bad, 1, 2.0), ConfigError);
}

TEST(TokenSet, PromptPrependsBackgroundSink) {
  const auto t = TokenSet::for_prompt(kCats, 1, 2.0);
  ASSERT_EQ(t.size(), 4);
  EXPECT_TRUE(t.is_background(0));
  EXPECT_EQ(t[0].prior, 2.0);
  EXPECT_EQ(t[1].prior, 0.0);
  EXPECT_EQ(t.categories(), kCats);
  EXPECT_EQ(t.index_of("cat"), 2);
  EXPECT_FALSE(t.index_of("horse"));
}

TEST(ProjectionWeights, StructureAndTiedKeys) {
  const auto w = ProjectionWeights::frozen(3);
  ASSERT_EQ(w.query.size(), 4u * 16);
  // W_Q W_Q^T = logit_scale * sqrt(d) * I.
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double dot = 0;
      for (int k = 0; k < 16; ++k) dot += w.query[i * 16 + k] * w.query[j * 16 + k];
      EXPECT_NEAR(dot, i == j ? 16.0 * 4.0 : 0.0, 1e-9);
    }
  // Every token value vector has unit norm; logits = scale * <f, v>.
  const auto t = TokenSet::for_prompt(kCats, 1, 0.0);
  const auto v = w.token_values(t);
  for (int i = 0; i < t.size(); ++i) {
    double s = 0;
    for (int c = 0; c < 4; ++c) s += v[i * 4 + c] * v[i * 4 + c];
    EXPECT_NEAR(std::sqrt(s), 1.0, 1e-9);
  }
  EXPECT_EQ(w.key, ProjectionWeights::frozen(3).key);
  EXPECT_NE(w.key, ProjectionWeights::frozen(4).key);
}

TEST(BlockFeatures, ConstantLatent) {
  LatentGrid z(64, 64, 4);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      for (int c = 0; c < 4; ++c) z.at(y, x, c) = 0.25f * (c + 1);
  const auto f = block_features(z);
  for (int b = 0; b < 256; ++b)
    for (int c = 0; c < 4; ++c) EXPECT_EQ(f.at(b)[c], 0.25f * (c + 1));
  EXPECT_THROW(block_features(z, 3), GeometryError);
}

TEST(BlockFeatures, SwapPermutesExactlyTwoFeatures) {
  const auto z = sample_latent(64, 64, 4, 2);
  SwapList s;
  s.pairs = {{{1, 2}, {10, 11}}};
  const auto f = block_features(z);
  const auto g = block_features(apply_block_permutation(z, s));
  for (int b = 0; b < 256; ++b) {
    const int src = b == 1 * 16 + 2 ? 10 * 16 + 11 : b == 10 * 16 + 11 ? 1 * 16 + 2 : b;
    for (int c = 0; c < 4; ++c) EXPECT_EQ(g.at(b)[c], f.at(src)[c]);
  }
}

TEST(CrossAttention, SingleTokenAndIdenticalTokens) {
  const auto z = sample_latent(64, 64, 4, 2);
  const auto w = ProjectionWeights::frozen(1);
  const std::vector<std::string> one = {"dog"};
  const auto m1 = step0_attention(z, TokenSet::from_names(one, 1), w);
  for (double v : m1.values) EXPECT_EQ(v, 1.0);

  const auto e = TokenSet::embed("dog", 1);
  const TokenSet twins({Token{"a", e, 0.0}, Token{"b", e, 0.0}});
  const auto m2 = step0_attention(z, twins, w);
  for (double v : m2.values) EXPECT_NEAR(v, 0.5, 1e-6);
}

TEST(CrossAttention, RowStochastic) {
  const auto z = sample_latent(64, 64, 4, 9);
  const auto m = step0_attention(z, TokenSet::for_prompt(kCats, 1, 2.0), ProjectionWeights::frozen(1));
  for (int b = 0; b < 256; ++b) {
    double s = 0;
    for (double v : m.row(b)) {
      EXPECT_GE(v, 0.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(CrossAttention, DimensionErrors) {
  const auto z = sample_latent(64, 64, 4, 9);
  const auto tokens = TokenSet::for_prompt(kCats, 1, 2.0);
  WeightConfig wc;
  wc.channels = 3;
  wc.embedding.value_dims = 3;
  EXPECT_THROW(step0_attention(z, tokens, ProjectionWeights::frozen(1, wc)), GeometryError);
  const std::vector<double> bias(10, 0.0);
  EXPECT_THROW(cross_attention(block_features(z), tokens, ProjectionWeights::frozen(1), bias), GeometryError);
  EXPECT_THROW(step0_attention(z, TokenSet{}, ProjectionWeights::frozen(1)), GeometryError);
}

TEST(CrossAttention, PermutationEquivarianceBitwise) {
  const auto tokens = TokenSet::for_prompt(kCats, 1, 2.0);
  const auto w = ProjectionWeights::frozen(1);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto z = sample_latent(64, 64, 4, seed);
    const auto s = random_swaps(seed, 1 + static_cast<int>(seed * 5 % 100));
    const auto lhs = step0_attention(apply_block_permutation(z, s), tokens, w);
    const auto rhs = permute_rows(step0_attention(z, tokens, w), s);
    EXPECT_EQ(lhs.values, rhs.values);
  }
}

TEST(CrossAttention, DeterministicAndSeedSensitive) {
  const auto tokens = TokenSet::for_prompt(kCats, 1, 2.0);
  const auto w = ProjectionWeights::frozen(1);
  const auto a = step0_attention(sample_latent(64, 64, 4, 1), tokens, w);
  EXPECT_EQ(a, step0_attention(sample_latent(64, 64, 4, 1), tokens, w));
  EXPECT_EQ(a, step0_attention(sample_latent(64, 64, 4, 1), tokens, w, Exec::serial));
  EXPECT_NE(a.values, step0_attention(sample_latent(64, 64, 4, 2), tokens, w).values);
}

TEST(CrossAttention, MovingFeatureTowardTokenRaisesItsAttention) {
  const auto tokens = TokenSet::for_prompt(kCats, 1, 2.0);
  const auto w = ProjectionWeights::frozen(1);
  const auto v = w.token_values(tokens);
  auto f = block_features(sample_latent(64, 64, 4, 5));
  const int tok = 2;
  double prev = cross_attention(f, tokens, w).at(0, tok);
  for (int step = 0; step < 5; ++step) {
    for (int c = 0; c < 4; ++c) f.values[c] += static_cast<float>(0.1 * v[tok * 4 + c]);
    const double now = cross_attention(f, tokens, w).at(0, tok);
    EXPECT_GT(now, prev);
    prev = now;
  }
}

TEST(AttentionExport, PgmAndJson) {
  const auto tokens = TokenSet::for_prompt(kCats, 1, 2.0);
  const auto m = step0_attention(sample_latent(64, 64, 4, 1), tokens, ProjectionWeights::frozen(1));
  std::ostringstream out;
  write_attention_pgm(out, m, 1);
  const auto s = out.str();
  ASSERT_EQ(s.substr(0, 13), "P5\n16 16\n255\n");
  ASSERT_EQ(s.size(), 13u + 256);
  EXPECT_EQ(static_cast<unsigned char>(s[13 + 5]), std::lround(m.at(5, 1) * 255));
  EXPECT_THROW(write_attention_pgm(out, m, 9), GeometryError);

  const auto j = attention_token_json(m, 2);
  EXPECT_EQ(j["token"], "cat");
  EXPECT_EQ(j["values"][3][4].get<double>(), m.at(BlockCoord{3, 4}, 2));
  const auto all = attention_to_json(m);
  EXPECT_EQ(all["tokens"].size(), 4u);
  EXPECT_EQ(all["maps"]["dog"][0][0].get<double>(), m.at(0, 1));
}
