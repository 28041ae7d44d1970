#include "noiseloom/mask_guidance.hpp"

#include <cmath>

#include "noiseloom/attention.hpp"
#include "noiseloom/error.hpp"

namespace noiseloom {

int LogitBias::nonzero() const {
  int n = 0;
  for (const double v : values) n += v != 0.0;
  return n;
}

double default_weight_in(BlockGrid grid) {
  return 0.5 * std::log(static_cast<double>(grid.size()));
}

LogitBias soft_bias(const LayoutGuidance& guidance, const TokenSet& tokens,
                    BlockGrid grid, double weight_in, double weight_out) {
  if (!(weight_in >= 0.0)) {
    throw ConfigError("mask weight_in must be >= 0, got " + std::to_string(weight_in));
  }
  if (!(weight_out <= 0.0)) {
    throw ConfigError("mask weight_out must be <= 0, got " + std::to_string(weight_out));
  }
  validate_guidance(guidance, grid, tokens);

  LogitBias bias;
  bias.grid = grid;
  bias.tokens = tokens.size();
  bias.weight_in = weight_in;
  bias.weight_out = weight_out;
  bias.values.assign(static_cast<std::size_t>(grid.size()) * bias.tokens, 0.0);
  for (const auto& item : guidance.items) {
    const int c = *tokens.index_of(item.category);
    for (int b = 0; b < grid.size(); ++b) {
      const double w = item.region.contains(grid.coord(b)) ? weight_in : weight_out;
      bias.values[static_cast<std::size_t>(b) * bias.tokens + c] += w;
    }
  }
  return bias;
}

LogitBias paint_bias(const LayoutGuidance& guidance, const TokenSet& tokens,
                     BlockGrid grid, double weight_in) {
  return soft_bias(guidance, tokens, grid, weight_in, 0.0);
}

LogitBias permute_bias(const LogitBias& bias, const SwapList& swaps) {
  validate_swaps(bias.grid, swaps);
  LogitBias out = bias;
  permute_blocks<double>(out.values, static_cast<std::size_t>(out.tokens), out.grid, swaps);
  return out;
}

}  // namespace noiseloom
