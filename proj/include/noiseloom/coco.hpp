#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "noiseloom/guidance.hpp"
#include "noiseloom/latent.hpp"

namespace noiseloom {

inline constexpr int kMaxObjectsPerSample = 2;

struct CocoSample {
  std::int64_t image_id = 0;
  std::string caption;
  std::vector<std::string> tokens;  // distinct categories, annotation order
  LayoutGuidance guidance;
};

// Pixel box [x, y, w, h] on a width x height image, rounded outward to the
// covering blocks of `grid`.
Region scale_box(double x, double y, double w, double h, int image_width,
                 int image_height, BlockGrid grid);

// COCO-style layout file: "images" (id, width, height, optional caption),
// "annotations" (image_id, bbox, category_id), "categories" (id, name) and
// optional "captions" (image_id, caption). A sample is kept when some caption
// mentions every annotated category (case-insensitive substring), it has at
// most two objects with distinct categories, and its scaled boxes are
// disjoint. Warns on `warn` when nothing survives.
std::vector<CocoSample> load_coco_layouts(const nlohmann::json& doc,
                                          BlockGrid grid,
                                          std::ostream* warn = nullptr);
std::vector<CocoSample> load_coco_layouts(const std::string& path,
                                          BlockGrid grid = {16, 16},
                                          std::ostream* warn = nullptr);

}  // namespace noiseloom
