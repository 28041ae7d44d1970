#include "noiseloom/guidance.hpp"

#include "noiseloom/attention.hpp"
#include "noiseloom/error.hpp"

namespace noiseloom {

std::vector<std::string> LayoutGuidance::categories() const {
  std::vector<std::string> out;
  for (const auto& it : items) out.push_back(it.category);
  return out;
}

void validate_guidance(const LayoutGuidance& g, BlockGrid grid) {
  if (g.items.empty()) throw GuidanceError("layout guidance has no items");
  for (std::size_t i = 0; i < g.items.size(); ++i) {
    const auto& it = g.items[i];
    if (it.category.empty()) throw GuidanceError("guidance item has no category");
    if (!grid.contains(it.region)) {
      throw GeometryError("guidance region " + to_string(it.region) + " for '" +
                          it.category + "' is empty or outside the " +
                          std::to_string(grid.rows) + "x" +
                          std::to_string(grid.cols) + " block grid");
    }
    for (std::size_t j = 0; j < i; ++j) {
      const auto& other = g.items[j];
      if (it.region.overlaps(other.region)) {
        throw GuidanceError("guidance regions overlap: " + other.category + " " +
                            to_string(other.region) + " and " + it.category +
                            " " + to_string(it.region));
      }
    }
  }
}

void validate_guidance(const LayoutGuidance& g, BlockGrid grid,
                       const TokenSet& tokens) {
  validate_guidance(g, grid);
  for (const auto& it : g.items) {
    if (!tokens.index_of(it.category)) {
      throw GuidanceError("category '" + it.category +
                          "' is not mentioned in the prompt");
    }
  }
}

Region region_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) {
    throw GuidanceError("box must be [top,left,bottom,right]");
  }
  for (const auto& v : j)
    if (!v.is_number_integer()) throw GuidanceError("box entries must be integers");
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

nlohmann::json region_to_json(const Region& r) {
  return nlohmann::json::array({r.top, r.left, r.bottom, r.right});
}

LayoutGuidance guidance_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("items") || !j["items"].is_array()) {
    throw GuidanceError("guidance must be an object with an 'items' array");
  }
  LayoutGuidance g;
  for (std::size_t i = 0; i < j["items"].size(); ++i) {
    const auto& item = j["items"][i];
    const std::string where = "items[" + std::to_string(i) + "]";
    if (!item.is_object() || !item.contains("box") || !item.contains("category")) {
      throw GuidanceError(where + " needs 'box' and 'category'");
    }
    if (!item["category"].is_string()) {
      throw GuidanceError(where + ".category must be a string");
    }
    try {
      g.items.push_back({region_from_json(item["box"]),
                         item["category"].get<std::string>()});
    } catch (const GuidanceError& e) {
      throw GuidanceError(where + ".box: " + e.what());
    }
  }
  if (j.contains("pairing_seed")) {
    if (!j["pairing_seed"].is_number_integer()) {
      throw GuidanceError("pairing_seed must be an integer");
    }
    g.pairing_seed = j["pairing_seed"].get<std::uint64_t>();
  }
  return g;
}

nlohmann::json guidance_to_json(const LayoutGuidance& g) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& it : g.items)
    items.push_back({{"box", region_to_json(it.region)}, {"category", it.category}});
  return {{"items", std::move(items)}, {"pairing_seed", g.pairing_seed}};
}

}  // namespace noiseloom
