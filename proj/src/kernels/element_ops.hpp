#pragma once

// Per-element bodies shared by the serial and OpenMP kernels.

#include <algorithm>
#include <cmath>
#include <span>

#include "noiseloom/kernels.hpp"

namespace noiseloom::kernels::detail {

inline void block_mean(std::span<const float> latent, const BlockLayout& g,
                       int b, std::span<float> out) {
  const int br = b / g.cols;
  const int bc = b % g.cols;
  const int w = g.width();
  const double inv = 1.0 / (static_cast<double>(g.block) * g.block);
  for (int ch = 0; ch < g.channels; ++ch) {
    double sum = 0.0;
    for (int dy = 0; dy < g.block; ++dy) {
      const int y = br * g.block + dy;
      for (int dx = 0; dx < g.block; ++dx) {
        const int x = bc * g.block + dx;
        sum += latent[(static_cast<std::size_t>(y) * w + x) * g.channels + ch];
      }
    }
    out[static_cast<std::size_t>(b) * g.channels + ch] =
        static_cast<float>(sum * inv);
  }
}

inline void attention_row(std::span<const float> features,
                          const AttentionProblem& p, int b,
                          std::span<double> out) {
  constexpr int kMaxKey = 256;
  double q[kMaxKey];
  const std::size_t fb = static_cast<std::size_t>(b) * p.channels;
  for (int j = 0; j < p.key_dim; ++j) {
    double acc = 0.0;
    for (int c = 0; c < p.channels; ++c) {
      acc += static_cast<double>(features[fb + c]) *
             p.query_weights[static_cast<std::size_t>(c) * p.key_dim + j];
    }
    q[j] = acc;
  }
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(p.key_dim));
  double* row = out.data() + static_cast<std::size_t>(b) * p.tokens;
  double max_logit = -INFINITY;
  for (int i = 0; i < p.tokens; ++i) {
    double dot = 0.0;
    for (int j = 0; j < p.key_dim; ++j) {
      dot += q[j] * p.keys[static_cast<std::size_t>(i) * p.key_dim + j];
    }
    double logit = dot * inv_sqrt_d + p.priors[i];
    if (!p.bias.empty()) logit += p.bias[static_cast<std::size_t>(b) * p.tokens + i];
    row[i] = logit;
    max_logit = std::max(max_logit, logit);
  }
  double total = 0.0;
  for (int i = 0; i < p.tokens; ++i) {
    row[i] = std::exp(row[i] - max_logit);
    total += row[i];
  }
  for (int i = 0; i < p.tokens; ++i) row[i] /= total;
}

inline void mix_row(std::span<const double> attn, std::span<const double> values,
                    int b, int tokens, int channels, double gain,
                    std::span<double> out) {
  for (int c = 0; c < channels; ++c) {
    double acc = 0.0;
    for (int i = 0; i < tokens; ++i) {
      acc += attn[static_cast<std::size_t>(b) * tokens + i] *
             values[static_cast<std::size_t>(i) * channels + c];
    }
    out[static_cast<std::size_t>(b) * channels + c] = gain * acc;
  }
}

inline void blend_cell(std::span<const double> in, int rows, int cols,
                       int channels, int radius, double weight, int b,
                       std::span<double> out) {
  const int r = b / cols;
  const int c = b % cols;
  const int r0 = std::max(0, r - radius), r1 = std::min(rows - 1, r + radius);
  const int c0 = std::max(0, c - radius), c1 = std::min(cols - 1, c + radius);
  const double n = static_cast<double>((r1 - r0 + 1) * (c1 - c0 + 1));
  for (int ch = 0; ch < channels; ++ch) {
    double sum = 0.0;
    for (int rr = r0; rr <= r1; ++rr)
      for (int cc = c0; cc <= c1; ++cc)
        sum += in[(static_cast<std::size_t>(rr) * cols + cc) * channels + ch];
    const std::size_t i = static_cast<std::size_t>(b) * channels + ch;
    out[i] = (1.0 - weight) * in[i] + weight * (sum / n);
  }
}

inline void noise_pixel_row(std::span<const float> latent,
                            std::span<const double> target,
                            const BlockLayout& g, double sqrt_ab,
                            double inv_sqrt_one_minus, int y,
                            std::span<float> out) {
  const int w = g.width();
  for (int x = 0; x < w; ++x) {
    const std::size_t blk =
        static_cast<std::size_t>(y / g.block) * g.cols + x / g.block;
    for (int ch = 0; ch < g.channels; ++ch) {
      const std::size_t i = (static_cast<std::size_t>(y) * w + x) * g.channels + ch;
      const double t = target[blk * g.channels + ch];
      out[i] = static_cast<float>((latent[i] - sqrt_ab * t) * inv_sqrt_one_minus);
    }
  }
}

struct DdimCoeffs {
  double sqrt_ab;
  double sqrt_one_minus_ab;
  double sqrt_ab_prev;
  double sqrt_one_minus_ab_prev;
};

inline DdimCoeffs ddim_coeffs(double ab, double ab_prev) {
  return {std::sqrt(ab), std::sqrt(1.0 - ab), std::sqrt(ab_prev),
          std::sqrt(1.0 - ab_prev)};
}

inline float ddim_element(float z, float e, const DdimCoeffs& k) {
  const double x0 = (static_cast<double>(z) - k.sqrt_one_minus_ab * e) / k.sqrt_ab;
  return static_cast<float>(k.sqrt_ab_prev * x0 + k.sqrt_one_minus_ab_prev * e);
}

inline float combine_element(std::span<const std::span<const float>> history,
                             std::span<const double> numerators,
                             double denominator, std::size_t i) {
  double acc = 0.0;
  for (std::size_t k = 0; k < numerators.size(); ++k) {
    acc += numerators[k] * static_cast<double>(history[k][i]);
  }
  return static_cast<float>(acc / denominator);
}

}  // namespace noiseloom::kernels::detail
