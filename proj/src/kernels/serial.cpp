#include "element_ops.hpp"

namespace noiseloom::kernels::serial {

void block_means(std::span<const float> latent, const BlockLayout& g,
                 std::span<float> out) {
  for (int b = 0; b < g.blocks(); ++b) detail::block_mean(latent, g, b, out);
}

void attention_rows(std::span<const float> features, const AttentionProblem& p,
                    std::span<double> out) {
  for (int b = 0; b < p.blocks; ++b) detail::attention_row(features, p, b, out);
}

void mix_values(std::span<const double> attn, std::span<const double> values,
                int blocks, int tokens, int channels, double gain,
                std::span<double> out) {
  for (int b = 0; b < blocks; ++b)
    detail::mix_row(attn, values, b, tokens, channels, gain, out);
}

void blend_box(std::span<const double> in, int rows, int cols, int channels,
               int radius, double weight, std::span<double> out) {
  for (int b = 0; b < rows * cols; ++b)
    detail::blend_cell(in, rows, cols, channels, radius, weight, b, out);
}

void noise_from_target(std::span<const float> latent,
                       std::span<const double> target, const BlockLayout& g,
                       double alpha_bar, std::span<float> out) {
  const double sqrt_ab = std::sqrt(alpha_bar);
  const double inv = 1.0 / std::sqrt(1.0 - alpha_bar);
  for (int y = 0; y < g.rows * g.block; ++y)
    detail::noise_pixel_row(latent, target, g, sqrt_ab, inv, y, out);
}

void ddim_update(std::span<const float> z, std::span<const float> eps,
                 double alpha_bar, double alpha_bar_prev, std::span<float> out) {
  const auto k = detail::ddim_coeffs(alpha_bar, alpha_bar_prev);
  for (std::size_t i = 0; i < z.size(); ++i)
    out[i] = detail::ddim_element(z[i], eps[i], k);
}

void multistep_combine(std::span<const std::span<const float>> history,
                       std::span<const double> numerators, double denominator,
                       std::span<float> out) {
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = detail::combine_element(history, numerators, denominator, i);
}

}  // namespace noiseloom::kernels::serial
