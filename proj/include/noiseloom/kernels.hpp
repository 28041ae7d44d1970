#pragma once

// Data-parallel inner loops of the engine. Every kernel has a serial
// reference and an OpenMP variant; both evaluate the same per-element
// expression in the same order, so their outputs are bitwise equal and the
// tests compare them directly.

#include <span>

namespace noiseloom {

enum class Exec { serial, parallel };

namespace kernels {

struct BlockLayout {
  int rows = 0;      // block rows
  int cols = 0;      // block cols
  int block = 0;     // pixels per block side
  int channels = 0;
  int width() const { return cols * block; }
  int blocks() const { return rows * cols; }
};

struct AttentionProblem {
  int blocks = 0;
  int channels = 0;
  int key_dim = 0;
  int tokens = 0;
  std::span<const double> query_weights;  // channels x key_dim
  std::span<const double> keys;           // tokens x key_dim
  std::span<const double> priors;         // tokens
  std::span<const double> bias;           // blocks x tokens, or empty
};

// Per-block mean of the B*B pixel channel vectors.
void block_means(std::span<const float> latent, const BlockLayout& g,
                 std::span<float> out, Exec exec);

// Row-softmax of (feature*W_Q)(K^T)/sqrt(d) + prior + bias, one row per block.
void attention_rows(std::span<const float> features,
                    const AttentionProblem& p, std::span<double> out,
                    Exec exec);

// out_b = gain * sum_i attn[b,i] * values[i]
void mix_values(std::span<const double> attn, std::span<const double> values,
                int blocks, int tokens, int channels, double gain,
                std::span<double> out, Exec exec);

// out = (1-weight)*in + weight*boxmean_radius(in), box clipped to the grid.
void blend_box(std::span<const double> in, int rows, int cols, int channels,
               int radius, double weight, std::span<double> out, Exec exec);

// eps = (z - sqrt(abar) * target_block) / sqrt(1 - abar)
void noise_from_target(std::span<const float> latent,
                       std::span<const double> target, const BlockLayout& g,
                       double alpha_bar, std::span<float> out, Exec exec);

// Deterministic DDIM (eta = 0) update.
void ddim_update(std::span<const float> z, std::span<const float> eps,
                 double alpha_bar, double alpha_bar_prev,
                 std::span<float> out, Exec exec);

// out = (sum_k numerators[k] * history[k]) / denominator, newest first.
void multistep_combine(std::span<const std::span<const float>> history,
                       std::span<const double> numerators, double denominator,
                       std::span<float> out, Exec exec);

namespace serial {
void block_means(std::span<const float>, const BlockLayout&, std::span<float>);
void attention_rows(std::span<const float>, const AttentionProblem&,
                    std::span<double>);
void mix_values(std::span<const double>, std::span<const double>, int, int,
                int, double, std::span<double>);
void blend_box(std::span<const double>, int, int, int, int, double,
               std::span<double>);
void noise_from_target(std::span<const float>, std::span<const double>,
                       const BlockLayout&, double, std::span<float>);
void ddim_update(std::span<const float>, std::span<const float>, double,
                 double, std::span<float>);
void multistep_combine(std::span<const std::span<const float>>,
                       std::span<const double>, double, std::span<float>);
}  // namespace serial

namespace omp {
void block_means(std::span<const float>, const BlockLayout&, std::span<float>);
void attention_rows(std::span<const float>, const AttentionProblem&,
                    std::span<double>);
void mix_values(std::span<const double>, std::span<const double>, int, int,
                int, double, std::span<double>);
void blend_box(std::span<const double>, int, int, int, int, double,
               std::span<double>);
void noise_from_target(std::span<const float>, std::span<const double>,
                       const BlockLayout&, double, std::span<float>);
void ddim_update(std::span<const float>, std::span<const float>, double,
                 double, std::span<float>);
void multistep_combine(std::span<const std::span<const float>>,
                       std::span<const double>, double, std::span<float>);
}  // namespace omp

}  // namespace kernels
}  // namespace noiseloom
