#include "noiseloom/kernels.hpp"

namespace noiseloom::kernels {

void block_means(std::span<const float> latent, const BlockLayout& g,
                 std::span<float> out, Exec exec) {
  exec == Exec::parallel ? omp::block_means(latent, g, out)
                         : serial::block_means(latent, g, out);
}

void attention_rows(std::span<const float> features, const AttentionProblem& p,
                    std::span<double> out, Exec exec) {
  exec == Exec::parallel ? omp::attention_rows(features, p, out)
                         : serial::attention_rows(features, p, out);
}

void mix_values(std::span<const double> attn, std::span<const double> values,
                int blocks, int tokens, int channels, double gain,
                std::span<double> out, Exec exec) {
  exec == Exec::parallel
      ? omp::mix_values(attn, values, blocks, tokens, channels, gain, out)
      : serial::mix_values(attn, values, blocks, tokens, channels, gain, out);
}

void blend_box(std::span<const double> in, int rows, int cols, int channels,
               int radius, double weight, std::span<double> out, Exec exec) {
  exec == Exec::parallel
      ? omp::blend_box(in, rows, cols, channels, radius, weight, out)
      : serial::blend_box(in, rows, cols, channels, radius, weight, out);
}

void noise_from_target(std::span<const float> latent,
                       std::span<const double> target, const BlockLayout& g,
                       double alpha_bar, std::span<float> out, Exec exec) {
  exec == Exec::parallel
      ? omp::noise_from_target(latent, target, g, alpha_bar, out)
      : serial::noise_from_target(latent, target, g, alpha_bar, out);
}

void ddim_update(std::span<const float> z, std::span<const float> eps,
                 double alpha_bar, double alpha_bar_prev, std::span<float> out,
                 Exec exec) {
  exec == Exec::parallel
      ? omp::ddim_update(z, eps, alpha_bar, alpha_bar_prev, out)
      : serial::ddim_update(z, eps, alpha_bar, alpha_bar_prev, out);
}

void multistep_combine(std::span<const std::span<const float>> history,
                       std::span<const double> numerators, double denominator,
                       std::span<float> out, Exec exec) {
  exec == Exec::parallel
      ? omp::multistep_combine(history, numerators, denominator, out)
      : serial::multistep_combine(history, numerators, denominator, out);
}

}  // namespace noiseloom::kernels
