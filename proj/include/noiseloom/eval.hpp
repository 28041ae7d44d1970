#pragma once

#include <optional>
#include <string>
#include <vector>

#include "noiseloom/guidance.hpp"
#include "noiseloom/latent.hpp"
#include "noiseloom/toy_model.hpp"

namespace noiseloom {

struct Detection {
  std::string category;
  Region box;
  double area_fraction = 0.0;  // box area over grid area
  int cells = 0;               // size of the connected component

  friend bool operator==(const Detection&, const Detection&) = default;
};

// 4-connected components per category, in category order and then in
// row-major order of each component's first cell. Components with fewer
// than min_area cells are dropped.
std::vector<Detection> detect(const LabelMap& labels, int min_area = 1);

double iou(const Region& a, const Region& b);

// Size thresholds as fractions of the image area: 150^2 and 300^2 on 512^2.
inline constexpr double kSmallFraction = (150.0 / 512.0) * (150.0 / 512.0);
inline constexpr double kLargeFraction = (300.0 / 512.0) * (300.0 / 512.0);
inline constexpr double kSuccessIou = 0.5;

enum class SizeClass { s, m, l };
const char* to_string(SizeClass s);
SizeClass size_class(double area_fraction);

struct EvalRecord {
  GuidanceItem item;
  double iou = 0.0;
  bool success = false;  // iou > 0.5
  SizeClass size = SizeClass::m;

  friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

// Best IoU over same-category detections per guidance item, 0 if none.
std::vector<EvalRecord> evaluate(const std::vector<Detection>& detections,
                                 const LayoutGuidance& guidance, BlockGrid grid);

// Mean IoU and success rate of one subset; empty subsets have no values.
struct SubsetStats {
  int n = 0;
  int successes = 0;
  double iou_sum = 0.0;

  std::optional<double> iou_mean() const;
  std::optional<double> success_rate() const;  // percent
  void add(const EvalRecord& r);
};

struct MethodRow {
  std::string method;
  SubsetStats all, s, m, l;
};

struct MetricsTable {
  std::vector<MethodRow> rows;

  const MethodRow* find(const std::string& method) const;
  // method,n,iou_mean,iou_s,iou_m,iou_l,rsuc,rsuc_s,rsuc_m,rsuc_l
  std::string csv() const;
};

MethodRow summarize(const std::string& method, const std::vector<EvalRecord>& records);

}  // namespace noiseloom
