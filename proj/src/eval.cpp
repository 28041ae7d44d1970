#include "noiseloom/eval.hpp"

#include <algorithm>
#include <cstdio>

namespace noiseloom {

std::vector<Detection> detect(const LabelMap& labels, int min_area) {
  const BlockGrid g = labels.grid;
  std::vector<Detection> out;
  std::vector<int> stack;
  for (int cat = 0; cat < static_cast<int>(labels.categories.size()); ++cat) {
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(g.size()), 0);
    for (int start = 0; start < g.size(); ++start) {
      if (seen[start] || labels.labels[start] != cat) continue;
      Region box{g.rows, g.cols, 0, 0};
      int cells = 0;
      stack.assign(1, start);
      seen[start] = 1;
      while (!stack.empty()) {
        const BlockCoord c = g.coord(stack.back());
        stack.pop_back();
        ++cells;
        box.top = std::min(box.top, c.row);
        box.left = std::min(box.left, c.col);
        box.bottom = std::max(box.bottom, c.row + 1);
        box.right = std::max(box.right, c.col + 1);
        const BlockCoord next[4] = {{c.row - 1, c.col}, {c.row + 1, c.col},
                                    {c.row, c.col - 1}, {c.row, c.col + 1}};
        for (const auto n : next) {
          if (!g.contains(n)) continue;
          const int i = g.index(n);
          if (!seen[i] && labels.labels[i] == cat) {
            seen[i] = 1;
            stack.push_back(i);
          }
        }
      }
      if (cells < min_area) continue;
      out.push_back({labels.categories[cat], box,
                     static_cast<double>(box.area()) / g.size(), cells});
    }
  }
  return out;
}

double iou(const Region& a, const Region& b) {
  const int h = std::min(a.bottom, b.bottom) - std::max(a.top, b.top);
  const int w = std::min(a.right, b.right) - std::max(a.left, b.left);
  const int inter = h > 0 && w > 0 ? h * w : 0;
  const int uni = a.area() + b.area() - inter;
  return uni > 0 ? static_cast<double>(inter) / uni : 0.0;
}

const char* to_string(SizeClass s) {
  switch (s) {
    case SizeClass::s: return "s";
    case SizeClass::m: return "m";
    case SizeClass::l: return "l";
  }
  return "?";
}

SizeClass size_class(double f) {
  if (f < kSmallFraction) return SizeClass::s;
  if (f > kLargeFraction) return SizeClass::l;
  return SizeClass::m;
}

std::vector<EvalRecord> evaluate(const std::vector<Detection>& detections,
                                 const LayoutGuidance& guidance, BlockGrid grid) {
  std::vector<EvalRecord> out;
  for (const auto& item : guidance.items) {
    EvalRecord r;
    r.item = item;
    for (const auto& d : detections)
      if (d.category == item.category) r.iou = std::max(r.iou, iou(d.box, item.region));
    r.success = r.iou > kSuccessIou;
    r.size = size_class(static_cast<double>(item.region.area()) / grid.size());
    out.push_back(std::move(r));
  }
  return out;
}

std::optional<double> SubsetStats::iou_mean() const {
  if (n == 0) return std::nullopt;
  return iou_sum / n;
}

std::optional<double> SubsetStats::success_rate() const {
  if (n == 0) return std::nullopt;
  return 100.0 * successes / n;
}

void SubsetStats::add(const EvalRecord& r) {
  ++n;
  successes += r.success;
  iou_sum += r.iou;
}

MethodRow summarize(const std::string& method, const std::vector<EvalRecord>& records) {
  MethodRow row;
  row.method = method;
  for (const auto& r : records) {
    row.all.add(r);
    (r.size == SizeClass::s ? row.s : r.size == SizeClass::m ? row.m : row.l).add(r);
  }
  return row;
}

const MethodRow* MetricsTable::find(const std::string& method) const {
  for (const auto& r : rows)
    if (r.method == method) return &r;
  return nullptr;
}

namespace {

std::string fixed(std::optional<double> v, int digits) {
  if (!v) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, *v);
  return buf;
}

}  // namespace

std::string MetricsTable::csv() const {
  std::string out = "method,n,iou_mean,iou_s,iou_m,iou_l,rsuc,rsuc_s,rsuc_m,rsuc_l\n";
  for (const auto& r : rows) {
    out += r.method + "," + std::to_string(r.all.n);
    for (const auto* s : {&r.all, &r.s, &r.m, &r.l}) out += "," + fixed(s->iou_mean(), 4);
    for (const auto* s : {&r.all, &r.s, &r.m, &r.l}) out += "," + fixed(s->success_rate(), 2);
    out += "\n";
  }
  return out;
}

}  // namespace noiseloom
