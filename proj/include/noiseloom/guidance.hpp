#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "noiseloom/latent.hpp"

namespace noiseloom {

class TokenSet;

struct GuidanceItem {
  Region region;
  std::string category;

  friend bool operator==(const GuidanceItem&, const GuidanceItem&) = default;
};

// Object-wise layout intent: each category should appear in its region.
struct LayoutGuidance {
  std::vector<GuidanceItem> items;
  std::uint64_t pairing_seed = 0;

  std::vector<std::string> categories() const;
  friend bool operator==(const LayoutGuidance&, const LayoutGuidance&) = default;
};

// Regions inside the grid, pairwise disjoint, categories present in tokens.
void validate_guidance(const LayoutGuidance& g, BlockGrid grid,
                       const TokenSet& tokens);
// Grid and overlap checks only.
void validate_guidance(const LayoutGuidance& g, BlockGrid grid);

// {"items":[{"box":[top,left,bottom,right],"category":"dog"}],"pairing_seed":N}
LayoutGuidance guidance_from_json(const nlohmann::json& j);
nlohmann::json guidance_to_json(const LayoutGuidance& g);

Region region_from_json(const nlohmann::json& j);
nlohmann::json region_to_json(const Region& r);

}  // namespace noiseloom
