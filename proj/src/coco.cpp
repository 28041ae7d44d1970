#include "noiseloom/coco.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "noiseloom/error.hpp"

namespace noiseloom {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool mentions_all(const std::string& caption, const std::vector<std::string>& cats) {
  const std::string text = lower(caption);
  return std::all_of(cats.begin(), cats.end(), [&](const std::string& c) {
    return text.find(lower(c)) != std::string::npos;
  });
}

// Line number and text around a byte offset, for parse diagnostics.
std::string line_context(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n');
  auto begin = text.rfind('\n', byte == 0 ? 0 : byte - 1);
  begin = begin == std::string::npos ? 0 : begin + 1;
  auto end = text.find('\n', byte);
  if (end == std::string::npos) end = text.size();
  std::string snippet = text.substr(begin, std::min<std::size_t>(end - begin, 80));
  return "line " + std::to_string(line) + ": " + snippet;
}

template <typename T>
T field(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw IngestError(where + " is missing '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw IngestError(where + "." + key + " has the wrong type");
  }
}

}  // namespace

Region scale_box(double x, double y, double w, double h, int image_width,
                 int image_height, BlockGrid grid) {
  if (image_width <= 0 || image_height <= 0) throw IngestError("image size must be positive");
  const double sy = static_cast<double>(grid.rows) / image_height;
  const double sx = static_cast<double>(grid.cols) / image_width;
  Region r{static_cast<int>(std::floor(y * sy)), static_cast<int>(std::floor(x * sx)),
           static_cast<int>(std::ceil((y + h) * sy)), static_cast<int>(std::ceil((x + w) * sx))};
  r.top = std::clamp(r.top, 0, grid.rows);
  r.left = std::clamp(r.left, 0, grid.cols);
  r.bottom = std::clamp(r.bottom, 0, grid.rows);
  r.right = std::clamp(r.right, 0, grid.cols);
  return r;
}

std::vector<CocoSample> load_coco_layouts(const nlohmann::json& doc, BlockGrid grid,
                                          std::ostream* warn) {
  if (!doc.is_object()) throw IngestError("layout file must hold a JSON object");
  for (const char* key : {"images", "annotations", "categories"}) {
    if (!doc.contains(key) || !doc[key].is_array()) {
      throw IngestError(std::string("layout file needs an array '") + key + "'");
    }
  }

  std::map<std::int64_t, std::string> category_names;
  for (std::size_t i = 0; i < doc["categories"].size(); ++i) {
    const auto& c = doc["categories"][i];
    const std::string where = "categories[" + std::to_string(i) + "]";
    category_names[field<std::int64_t>(c, "id", where)] = field<std::string>(c, "name", where);
  }

  struct Image {
    int width = 0, height = 0;
    std::vector<std::string> captions;
    std::vector<std::pair<std::string, Region>> objects;
  };
  std::map<std::int64_t, Image> images;
  for (std::size_t i = 0; i < doc["images"].size(); ++i) {
    const auto& im = doc["images"][i];
    const std::string where = "images[" + std::to_string(i) + "]";
    Image& img = images[field<std::int64_t>(im, "id", where)];
    img.width = field<int>(im, "width", where);
    img.height = field<int>(im, "height", where);
    if (im.contains("caption")) img.captions.push_back(field<std::string>(im, "caption", where));
  }
  if (doc.contains("captions")) {
    for (std::size_t i = 0; i < doc["captions"].size(); ++i) {
      const auto& c = doc["captions"][i];
      const std::string where = "captions[" + std::to_string(i) + "]";
      const auto it = images.find(field<std::int64_t>(c, "image_id", where));
      if (it != images.end()) it->second.captions.push_back(field<std::string>(c, "caption", where));
    }
  }
  for (std::size_t i = 0; i < doc["annotations"].size(); ++i) {
    const auto& a = doc["annotations"][i];
    const std::string where = "annotations[" + std::to_string(i) + "]";
    const auto it = images.find(field<std::int64_t>(a, "image_id", where));
    if (it == images.end()) continue;
    const auto cat = category_names.find(field<std::int64_t>(a, "category_id", where));
    if (cat == category_names.end()) throw IngestError(where + " names an unknown category");
    const auto bbox = field<std::vector<double>>(a, "bbox", where);
    if (bbox.size() != 4) throw IngestError(where + ".bbox must be [x,y,w,h]");
    it->second.objects.emplace_back(
        cat->second, scale_box(bbox[0], bbox[1], bbox[2], bbox[3], it->second.width,
                               it->second.height, grid));
  }

  std::vector<CocoSample> out;
  for (const auto& [id, img] : images) {
    if (img.objects.empty() || img.objects.size() > kMaxObjectsPerSample) continue;
    std::vector<std::string> cats;
    for (const auto& [name, box] : img.objects) cats.push_back(name);
    auto distinct = cats;
    std::sort(distinct.begin(), distinct.end());
    if (std::adjacent_find(distinct.begin(), distinct.end()) != distinct.end()) continue;

    const auto caption = std::find_if(img.captions.begin(), img.captions.end(),
                                      [&](const std::string& c) { return mentions_all(c, cats); });
    if (caption == img.captions.end()) continue;

    CocoSample s;
    s.image_id = id;
    s.caption = *caption;
    s.tokens = cats;
    for (const auto& [name, box] : img.objects) s.guidance.items.push_back({box, name});
    try {
      validate_guidance(s.guidance, grid);
    } catch (const Error&) {
      continue;  // degenerate or overlapping boxes
    }
    out.push_back(std::move(s));
  }
  if (out.empty() && warn) *warn << "warning: no usable layouts in COCO file\n";
  return out;
}

std::vector<CocoSample> load_coco_layouts(const std::string& path, BlockGrid grid,
                                          std::ostream* warn) {
  std::ifstream f(path);
  if (!f) throw IngestError("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IngestError(path + ": malformed JSON at " + line_context(text, e.byte ? e.byte - 1 : 0));
  }
  return load_coco_layouts(doc, grid, warn ? warn : &std::cerr);
}

}  // namespace noiseloom
