#pragma once

#include <span>
#include <vector>

#include "noiseloom/guidance.hpp"
#include "noiseloom/latent.hpp"

namespace noiseloom {

class TokenSet;

// Additive pre-softmax attention bias, blocks x tokens.
struct LogitBias {
  BlockGrid grid;
  int tokens = 0;
  double weight_in = 0.0;
  double weight_out = 0.0;
  std::vector<double> values;

  double at(int block, int token) const {
    return values[static_cast<std::size_t>(block) * tokens + token];
  }
  std::span<const double> span() const { return values; }
  int nonzero() const;
};

// 0.5 * ln(blocks): a logit shift comparable to the spread of a row.
double default_weight_in(BlockGrid grid);
inline double default_weight_out(double weight_in) { return -0.5 * weight_in; }

// weight_in on (block in region, category), zero elsewhere.
LogitBias paint_bias(const LayoutGuidance& guidance, const TokenSet& tokens,
                     BlockGrid grid, double weight_in);
// paint_bias plus weight_out on (block outside region, category).
LogitBias soft_bias(const LayoutGuidance& guidance, const TokenSet& tokens,
                    BlockGrid grid, double weight_in, double weight_out);

// Moves bias rows along with a block permutation of the latent.
LogitBias permute_bias(const LogitBias& bias, const SwapList& swaps);

}  // namespace noiseloom
