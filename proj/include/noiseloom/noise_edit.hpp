#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "noiseloom/attention.hpp"
#include "noiseloom/guidance.hpp"
#include "noiseloom/latent.hpp"

namespace noiseloom {

// The s highest-attention blocks, s = region area. Ties break toward the
// smaller row-major index.
struct SelectedSet {
  std::vector<BlockCoord> coords;
  double a_min = 0.0;  // attention of the last selected block
};

SelectedSet select_top_s(std::span<const double> attention, BlockGrid grid,
                         const Region& region);
// Restricted to blocks with candidates[b] != 0; may return fewer than s.
SelectedSet select_top_s(std::span<const double> attention, BlockGrid grid,
                         const Region& region,
                         std::span<const std::uint8_t> candidates);

struct InOut {
  std::vector<BlockCoord> in;   // selected, outside the region
  std::vector<BlockCoord> out;  // inside the region, not selected
};

// With a full selection Out is every unselected region block in row-major
// order and |In| == |Out|. With a partial selection (fewer than s
// candidates) Out keeps only the |In| region blocks with the lowest
// attention, which requires `attention`.
InOut compute_in_out(const SelectedSet& selected, const Region& region,
                     BlockGrid grid, std::span<const double> attention = {});

// Shuffles `out` with the pairing stream and zips it with `in`.
SwapList build_swaps(std::span<const BlockCoord> in,
                     std::span<const BlockCoord> out,
                     std::uint64_t pairing_seed);

// Per block, the index (into `categories`) of the guided category with the
// largest attention; ties go to the earlier category.
std::vector<int> classify_blocks(const AttentionMap& map,
                                 std::span<const std::string> categories);

struct LayoutSwapResult {
  LatentGrid latent;            // z'
  std::vector<SwapList> swaps;  // per guidance item, in item order
  std::vector<std::size_t> order;  // item indices in the order applied (larger regions first)
  AttentionMap attention;       // step-0 attention of the input latent
};

LayoutSwapResult layout_swap(const LatentGrid& z_T, const TokenSet& tokens,
                             const ProjectionWeights& w,
                             const LayoutGuidance& guidance,
                             std::uint64_t pairing_seed,
                             Exec exec = Exec::parallel);

nlohmann::json swaps_to_json(const SwapList& swaps);
SwapList swaps_from_json(const nlohmann::json& j);

}  // namespace noiseloom
