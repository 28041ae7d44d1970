#include "noiseloom/noise_edit.hpp"

#include <algorithm>
#include <numeric>

#include "noiseloom/error.hpp"
#include "noiseloom/rng.hpp"

namespace noiseloom {

namespace {

void check_column(std::span<const double> attention, BlockGrid grid) {
  if (attention.size() != static_cast<std::size_t>(grid.size())) {
    throw GeometryError("attention column has " + std::to_string(attention.size()) +
                        " entries for a grid of " + std::to_string(grid.size()));
  }
}

}  // namespace

SelectedSet select_top_s(std::span<const double> attention, BlockGrid grid,
                         const Region& region,
                         std::span<const std::uint8_t> candidates) {
  check_column(attention, grid);
  if (!grid.contains(region)) {
    throw GeometryError("region " + to_string(region) +
                        " is empty or larger than the block grid");
  }
  if (!candidates.empty() && candidates.size() != attention.size()) {
    throw GeometryError("candidate mask does not match the grid");
  }
  std::vector<int> order;
  order.reserve(attention.size());
  for (int b = 0; b < grid.size(); ++b)
    if (candidates.empty() || candidates[b]) order.push_back(b);
  const auto s = std::min<std::size_t>(region.area(), order.size());
  std::partial_sort(order.begin(), order.begin() + s, order.end(),
                    [&](int a, int b) {
                      if (attention[a] != attention[b]) return attention[a] > attention[b];
                      return a < b;
                    });
  SelectedSet out;
  for (std::size_t i = 0; i < s; ++i) out.coords.push_back(grid.coord(order[i]));
  out.a_min = s > 0 ? attention[order[s - 1]] : 0.0;
  return out;
}

SelectedSet select_top_s(std::span<const double> attention, BlockGrid grid,
                         const Region& region) {
  return select_top_s(attention, grid, region, {});
}

InOut compute_in_out(const SelectedSet& selected, const Region& region,
                     BlockGrid grid, std::span<const double> attention) {
  InOut io;
  std::vector<std::uint8_t> chosen(static_cast<std::size_t>(grid.size()), 0);
  for (const auto c : selected.coords) {
    chosen[grid.index(c)] = 1;
    if (!region.contains(c)) io.in.push_back(c);
  }
  for (int r = region.top; r < region.bottom; ++r)
    for (int c = region.left; c < region.right; ++c)
      if (!chosen[grid.index({r, c})]) io.out.push_back({r, c});

  if (io.out.size() > io.in.size()) {
    // Partial fill: only the weakest region blocks give way.
    if (attention.empty()) {
      throw GeometryError("partial selection needs the attention column");
    }
    check_column(attention, grid);
    std::stable_sort(io.out.begin(), io.out.end(), [&](BlockCoord a, BlockCoord b) {
      return attention[grid.index(a)] < attention[grid.index(b)];
    });
    io.out.resize(io.in.size());
    std::sort(io.out.begin(), io.out.end());
  }
  return io;
}

SwapList build_swaps(std::span<const BlockCoord> in,
                     std::span<const BlockCoord> out,
                     std::uint64_t pairing_seed) {
  if (in.size() != out.size()) {
    throw InvalidPairingError("In has " + std::to_string(in.size()) +
                              " blocks but Out has " + std::to_string(out.size()));
  }
  std::vector<BlockCoord> shuffled(out.begin(), out.end());
  const CounterRng rng(pairing_seed, StreamTag::pairing);
  for (std::size_t i = shuffled.size(); i > 1; --i) {
    const auto j = rng.below(i, i);
    std::swap(shuffled[i - 1], shuffled[j]);
  }
  SwapList swaps;
  swaps.pairing_seed = pairing_seed;
  for (std::size_t i = 0; i < in.size(); ++i) swaps.pairs.push_back({in[i], shuffled[i]});
  return swaps;
}

std::vector<int> classify_blocks(const AttentionMap& map,
                                 std::span<const std::string> categories) {
  if (categories.empty()) throw GuidanceError("no categories to classify");
  std::vector<int> cols;
  for (const auto& c : categories) {
    const auto idx = map.token_index(c);
    if (!idx) throw GuidanceError("category '" + c + "' has no attention map");
    cols.push_back(*idx);
  }
  std::vector<int> assign(static_cast<std::size_t>(map.grid.size()), 0);
  for (int b = 0; b < map.grid.size(); ++b) {
    int best = 0;
    for (std::size_t k = 1; k < cols.size(); ++k)
      if (map.at(b, cols[k]) > map.at(b, cols[best])) best = static_cast<int>(k);
    assign[b] = best;
  }
  return assign;
}

LayoutSwapResult layout_swap(const LatentGrid& z_T, const TokenSet& tokens,
                             const ProjectionWeights& w,
                             const LayoutGuidance& guidance,
                             std::uint64_t pairing_seed, Exec exec) {
  const BlockGrid grid = z_T.blocks();
  validate_guidance(guidance, grid, tokens);

  LayoutSwapResult result;
  result.attention = step0_attention(z_T, tokens, w, exec);
  result.latent = z_T;
  result.swaps.resize(guidance.items.size());

  const std::size_t n_items = guidance.items.size();
  const bool multi = n_items > 1;
  std::vector<int> owner;  // guided category per block, moves with the block
  if (multi) {
    const auto cats = guidance.categories();
    owner = classify_blocks(result.attention, cats);
  }

  std::vector<std::size_t> order(n_items);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return guidance.items[a].region.area() > guidance.items[b].region.area();
  });

  AttentionMap current = result.attention;
  std::vector<std::uint8_t> locked(static_cast<std::size_t>(grid.size()), 0);
  for (const std::size_t k : order) {
    const auto& item = guidance.items[k];
    const int col_index = *current.token_index(item.category);
    const auto column = current.column(col_index);

    std::vector<std::uint8_t> candidates(static_cast<std::size_t>(grid.size()), 1);
    for (int b = 0; b < grid.size(); ++b) {
      if (locked[b]) candidates[b] = 0;
      if (multi && owner[b] != static_cast<int>(k)) candidates[b] = 0;
    }
    const auto selected = select_top_s(column, grid, item.region, candidates);
    const auto io = compute_in_out(selected, item.region, grid, column);
    const std::uint64_t seed = multi ? derive_seed(pairing_seed, k) : pairing_seed;
    SwapList swaps = build_swaps(io.in, io.out, seed);

    result.latent = apply_block_permutation(result.latent, swaps);
    current = permute_rows(current, swaps);
    if (multi) permute_blocks<int>(owner, 1, grid, swaps);
    for (int r = item.region.top; r < item.region.bottom; ++r)
      for (int c = item.region.left; c < item.region.right; ++c)
        locked[grid.index({r, c})] = 1;
    result.swaps[k] = std::move(swaps);
  }
  result.order = std::move(order);
  return result;
}

nlohmann::json swaps_to_json(const SwapList& swaps) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : swaps.pairs) {
    pairs.push_back({{"in", {p.in.row, p.in.col}}, {"out", {p.out.row, p.out.col}}});
  }
  return {{"pairs", std::move(pairs)}, {"pairing_seed", swaps.pairing_seed}};
}

SwapList swaps_from_json(const nlohmann::json& j) {
  SwapList s;
  s.pairing_seed = j.value("pairing_seed", std::uint64_t{0});
  for (const auto& p : j.at("pairs")) {
    s.pairs.push_back({{p.at("in")[0].get<int>(), p.at("in")[1].get<int>()},
                       {p.at("out")[0].get<int>(), p.at("out")[1].get<int>()}});
  }
  return s;
}

}  // namespace noiseloom
