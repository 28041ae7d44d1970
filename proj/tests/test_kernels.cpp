// Serial and OpenMP kernels must agree bitwise; each is also checked against
// a scalar recomputation.

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numeric>
#include <omp.h>

#include "noiseloom/kernels.hpp"
#include "noiseloom/latent.hpp"
#include "noiseloom/rng.hpp"

using namespace noiseloom;
using namespace noiseloom::kernels;

namespace {

template <typename T>
bool same_bits(const std::vector<T>& a, const std::vector<T>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

std::vector<double> random_doubles(std::size_t n, std::uint64_t seed) {
  const CounterRng r(seed, StreamTag::bench);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = r.normal(i);
  return v;
}

class KernelThreads : public ::testing::Test {
 protected:
  void SetUp() override { omp_set_num_threads(4); }
};

}  // namespace

TEST_F(KernelThreads, BlockMeans) {
  const auto z = sample_latent(64, 64, 4, 3);
  const BlockLayout g{16, 16, 4, 4};
  std::vector<float> s(256 * 4), p(256 * 4);
  serial::block_means(z.values(), g, s);
  omp::block_means(z.values(), g, p);
  EXPECT_TRUE(same_bits(s, p));
  // Scalar oracle for block (5, 9), channel 2.
  double sum = 0;
  for (int y = 20; y < 24; ++y)
    for (int x = 36; x < 40; ++x) sum += z.at(y, x, 2);
  EXPECT_NEAR(s[(5 * 16 + 9) * 4 + 2], sum / 16, 1e-6);
}

TEST_F(KernelThreads, BlockMeansHandGrid) {
  // 2x2 blocks of 2x2 pixels, one channel, values 0..15 row-major.
  std::vector<float> v(16);
  std::iota(v.begin(), v.end(), 0.0f);
  std::vector<float> out(4);
  serial::block_means(v, {2, 2, 2, 1}, out);
  EXPECT_FLOAT_EQ(out[0], (0 + 1 + 4 + 5) / 4.0f);
  EXPECT_FLOAT_EQ(out[1], (2 + 3 + 6 + 7) / 4.0f);
  EXPECT_FLOAT_EQ(out[2], (8 + 9 + 12 + 13) / 4.0f);
  EXPECT_FLOAT_EQ(out[3], (10 + 11 + 14 + 15) / 4.0f);
}

TEST_F(KernelThreads, AttentionRows) {
  const int blocks = 256, c = 4, d = 16, k = 5;
  const auto fd = random_doubles(blocks * c, 1);
  std::vector<float> feats(fd.begin(), fd.end());
  const auto wq = random_doubles(c * d, 2), keys = random_doubles(k * d, 3);
  const auto bias = random_doubles(blocks * k, 4);
  const std::vector<double> priors{2.0, 0, 0, 0, 0};
  const AttentionProblem pr{blocks, c, d, k, wq, keys, priors, bias};
  std::vector<double> s(blocks * k), p(blocks * k);
  serial::attention_rows(feats, pr, s);
  omp::attention_rows(feats, pr, p);
  EXPECT_TRUE(same_bits(s, p));

  for (int b : {0, 77, 255}) {
    std::vector<double> logit(k);
    for (int i = 0; i < k; ++i) {
      double acc = 0;
      for (int j = 0; j < d; ++j) {
        double q = 0;
        for (int ch = 0; ch < c; ++ch) q += feats[b * c + ch] * wq[ch * d + j];
        acc += q * keys[i * d + j];
      }
      logit[i] = acc / 4.0 + priors[i] + bias[b * k + i];
    }
    double z = 0;
    for (double l : logit) z += std::exp(l);
    double row_sum = 0;
    for (int i = 0; i < k; ++i) {
      EXPECT_NEAR(s[b * k + i], std::exp(logit[i]) / z, 1e-12);
      row_sum += s[b * k + i];
    }
    EXPECT_NEAR(row_sum, 1.0, 1e-12);
  }
}

TEST_F(KernelThreads, MixValues) {
  const auto attn = random_doubles(256 * 3, 5), vals = random_doubles(3 * 4, 6);
  std::vector<double> s(256 * 4), p(256 * 4);
  serial::mix_values(attn, vals, 256, 3, 4, 1.5, s);
  omp::mix_values(attn, vals, 256, 3, 4, 1.5, p);
  EXPECT_TRUE(same_bits(s, p));
  double want = 0;
  for (int i = 0; i < 3; ++i) want += attn[10 * 3 + i] * vals[i * 4 + 1];
  EXPECT_NEAR(s[10 * 4 + 1], 1.5 * want, 1e-12);
}

TEST_F(KernelThreads, BlendBox) {
  const auto in = random_doubles(16 * 16 * 4, 7);
  std::vector<double> s(in.size()), p(in.size());
  serial::blend_box(in, 16, 16, 4, 1, 0.2, s);
  omp::blend_box(in, 16, 16, 4, 1, 0.2, p);
  EXPECT_TRUE(same_bits(s, p));
  // Corner (0,0): 2x2 clipped box.
  double box = 0;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) box += in[(r * 16 + c) * 4];
  EXPECT_NEAR(s[0], 0.8 * in[0] + 0.2 * box / 4, 1e-12);
  // Interior (5,5): full 3x3 box.
  box = 0;
  for (int r = 4; r < 7; ++r)
    for (int c = 4; c < 7; ++c) box += in[(r * 16 + c) * 4 + 3];
  EXPECT_NEAR(s[(5 * 16 + 5) * 4 + 3], 0.8 * in[(5 * 16 + 5) * 4 + 3] + 0.2 * box / 9, 1e-12);
  // weight 0 is the identity.
  serial::blend_box(in, 16, 16, 4, 1, 0.0, s);
  EXPECT_TRUE(same_bits(s, in));
}

TEST_F(KernelThreads, NoiseFromTargetAndDdim) {
  const auto z = sample_latent(64, 64, 4, 8);
  const auto target = random_doubles(256 * 4, 9);
  const BlockLayout g{16, 16, 4, 4};
  std::vector<float> s(z.size()), p(z.size());
  serial::noise_from_target(z.values(), target, g, 0.6, s);
  omp::noise_from_target(z.values(), target, g, 0.6, p);
  EXPECT_TRUE(same_bits(s, p));
  const std::size_t i = z.offset(13, 50, 2);
  const double t = target[(3 * 16 + 12) * 4 + 2];
  EXPECT_NEAR(s[i], (z.values()[i] - std::sqrt(0.6) * t) / std::sqrt(0.4), 1e-5);

  std::vector<float> ds(z.size()), dp(z.size());
  serial::ddim_update(z.values(), s, 0.6, 0.8, ds);
  omp::ddim_update(z.values(), s, 0.6, 0.8, dp);
  EXPECT_TRUE(same_bits(ds, dp));
}

TEST_F(KernelThreads, MultistepCombine) {
  std::vector<std::vector<float>> h;
  for (int k = 0; k < 4; ++k) {
    const auto d = random_doubles(1000, 20 + k);
    h.emplace_back(d.begin(), d.end());
  }
  std::vector<std::span<const float>> spans(h.begin(), h.end());
  const std::vector<double> num{55, -59, 37, -9};
  std::vector<float> s(1000), p(1000);
  serial::multistep_combine(spans, num, 24, s);
  omp::multistep_combine(spans, num, 24, p);
  EXPECT_TRUE(same_bits(s, p));
}

TEST_F(KernelThreads, DispatchSelectsVariant) {
  const auto z = sample_latent(32, 32, 4, 1);
  const BlockLayout g{8, 8, 4, 4};
  std::vector<float> a(256), b(256);
  block_means(z.values(), g, a, Exec::serial);
  block_means(z.values(), g, b, Exec::parallel);
  EXPECT_TRUE(same_bits(a, b));
}
