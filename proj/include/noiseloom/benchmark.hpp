#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "noiseloom/eval.hpp"
#include "noiseloom/guidance.hpp"
#include "noiseloom/sampler.hpp"
#include "noiseloom/toy_model.hpp"

namespace noiseloom {

enum class Method { baseline, swap, paint, soft, paint_swap, soft_swap };
const char* to_string(Method m);
Method parse_method(const std::string& name);

// Category names drawn by the synthetic layout generator.
const std::vector<std::string>& synthetic_vocabulary();

// One random layout: box area fraction uniform in [0.02, 0.5], aspect
// exp(U(-0.5, 0.5)), categories distinct, boxes disjoint.
LayoutGuidance synthetic_layout(std::uint64_t seed, int objects, BlockGrid grid);

struct LayoutSource {
  enum class Kind { synthetic, coco, inline_list };
  Kind kind = Kind::synthetic;
  std::vector<int> object_counts{1, 2};  // synthetic: layouts per seed
  std::string path;                      // coco
  int limit = 0;                         // coco: 0 keeps all
  std::vector<LayoutGuidance> layouts;   // inline
};

struct BenchmarkConfig {
  std::vector<Method> methods{Method::baseline, Method::swap, Method::soft,
                              Method::soft_swap};
  int seeds = 1;
  std::uint64_t benchmark_seed = 0;
  LayoutSource layouts;
  std::optional<double> weight_in;   // default 0.5 ln(blocks)
  std::optional<double> weight_out;  // default -weight_in / 2
  ToyModelParams params;
  SamplerKind sampler = SamplerKind::plms;
  int workers = 0;  // 0: OpenMP default

  void validate() const;
};

BenchmarkConfig benchmark_config_from_json(const nlohmann::json& j);
BenchmarkConfig load_benchmark_config(const std::string& path);

struct BenchmarkResult {
  MetricsTable table;
  // records[m] lists every EvalRecord of methods[m] in task order.
  std::vector<std::vector<EvalRecord>> records;
  int tasks = 0;
};

// Every (seed, layout) task generates once per method from the same z_T.
// Tasks run on a worker pool; results are folded in task order, so the
// table does not depend on the number of workers.
BenchmarkResult run_benchmark(const BenchmarkConfig& config);

}  // namespace noiseloom
