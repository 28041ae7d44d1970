#include "noiseloom/benchmark.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <omp.h>

#include "noiseloom/coco.hpp"
#include "noiseloom/error.hpp"
#include "noiseloom/mask_guidance.hpp"
#include "noiseloom/noise_edit.hpp"
#include "noiseloom/rng.hpp"

namespace noiseloom {

const char* to_string(Method m) {
  switch (m) {
    case Method::baseline: return "baseline";
    case Method::swap: return "swap";
    case Method::paint: return "paint";
    case Method::soft: return "soft";
    case Method::paint_swap: return "paint+swap";
    case Method::soft_swap: return "soft+swap";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (const Method m : {Method::baseline, Method::swap, Method::paint, Method::soft,
                         Method::paint_swap, Method::soft_swap})
    if (name == to_string(m)) return m;
  throw ConfigError("unknown method '" + name + "'");
}

const std::vector<std::string>& synthetic_vocabulary() {
  static const std::vector<std::string> v = {"person", "dog", "cat", "car",
                                             "horse", "bird", "boat", "chair"};
  return v;
}

LayoutGuidance synthetic_layout(std::uint64_t seed, int objects, BlockGrid grid) {
  const auto& vocab = synthetic_vocabulary();
  if (objects < 1 || objects > static_cast<int>(vocab.size())) {
    throw ConfigError("synthetic layouts take 1.." + std::to_string(vocab.size()) + " objects");
  }
  const CounterRng rng(seed, StreamTag::layout);
  LayoutGuidance g;
  std::uint64_t counter = 0;
  for (int attempt = 0; static_cast<int>(g.items.size()) < objects; ++attempt) {
    if (attempt > 10000) throw ConfigError("could not place synthetic layout");
    const double frac = 0.02 + 0.48 * rng.uniform(counter++);
    const double aspect = std::exp(rng.uniform(counter++) - 0.5);
    const double area = frac * grid.size();
    const int h = static_cast<int>(std::lround(std::clamp(std::sqrt(area * aspect), 1.0, double(grid.rows))));
    const int w = static_cast<int>(std::lround(std::clamp(area / h, 1.0, double(grid.cols))));
    const int top = static_cast<int>(rng.below(counter++, grid.rows - h + 1));
    const int left = static_cast<int>(rng.below(counter++, grid.cols - w + 1));
    const std::string& cat = vocab[rng.below(counter++, vocab.size())];
    const Region box{top, left, top + h, left + w};
    bool clash = false;
    for (const auto& it : g.items) clash |= it.region.overlaps(box) || it.category == cat;
    if (!clash) g.items.push_back({box, cat});
  }
  g.pairing_seed = derive_seed(seed, 0x70616972);
  return g;
}

void BenchmarkConfig::validate() const {
  if (methods.empty()) throw ConfigError("benchmark needs at least one method");
  std::set<Method> seen;
  for (const Method m : methods)
    if (!seen.insert(m).second) throw ConfigError(std::string("method listed twice: ") + to_string(m));
  if (seeds < 1) throw ConfigError("seeds must be >= 1");
  if (workers < 0) throw ConfigError("workers must be >= 0");
  if (weight_in && !(*weight_in >= 0.0)) throw ConfigError("w_in must be >= 0");
  if (weight_out && !(*weight_out <= 0.0)) throw ConfigError("w_out must be <= 0");
  params.validate();
  switch (layouts.kind) {
    case LayoutSource::Kind::synthetic:
      if (layouts.object_counts.empty()) throw ConfigError("object_counts is empty");
      for (const int n : layouts.object_counts)
        if (n < 1 || n > 2) throw ConfigError("object_counts entries must be 1 or 2");
      break;
    case LayoutSource::Kind::coco:
      if (layouts.path.empty()) throw ConfigError("coco layouts need a path");
      if (layouts.limit < 0) throw ConfigError("limit must be >= 0");
      break;
    case LayoutSource::Kind::inline_list:
      if (layouts.layouts.empty()) throw ConfigError("inline layouts are empty");
      for (const auto& g : layouts.layouts) validate_guidance(g, {16, 16});
      break;
  }
}

namespace {

void expect_keys(const nlohmann::json& j, const std::set<std::string>& known,
                 const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

template <typename T>
T get(const nlohmann::json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + " is missing or has the wrong type");
  }
}

}  // namespace

BenchmarkConfig benchmark_config_from_json(const nlohmann::json& j) {
  expect_keys(j, {"methods", "seeds", "benchmark_seed", "layouts", "w_in", "w_out",
                  "params", "sampler", "workers"},
              "config");
  BenchmarkConfig c;
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& m : get<std::vector<std::string>>(j, "methods", "config"))
      c.methods.push_back(parse_method(m));
  }
  if (j.contains("seeds")) c.seeds = get<int>(j, "seeds", "config");
  if (j.contains("benchmark_seed")) c.benchmark_seed = get<std::uint64_t>(j, "benchmark_seed", "config");
  if (j.contains("w_in")) c.weight_in = get<double>(j, "w_in", "config");
  if (j.contains("w_out")) c.weight_out = get<double>(j, "w_out", "config");
  if (j.contains("workers")) c.workers = get<int>(j, "workers", "config");
  if (j.contains("sampler")) c.sampler = parse_sampler(get<std::string>(j, "sampler", "config"));
  if (j.contains("params")) c.params = params_from_json(j["params"]);
  if (j.contains("layouts")) {
    const auto& l = j["layouts"];
    expect_keys(l, {"source", "object_counts", "path", "limit", "layouts"}, "layouts");
    const auto source = get<std::string>(l, "source", "layouts");
    if (source == "synthetic") {
      c.layouts.kind = LayoutSource::Kind::synthetic;
      if (l.contains("object_counts"))
        c.layouts.object_counts = get<std::vector<int>>(l, "object_counts", "layouts");
    } else if (source == "coco") {
      c.layouts.kind = LayoutSource::Kind::coco;
      c.layouts.path = get<std::string>(l, "path", "layouts");
      if (l.contains("limit")) c.layouts.limit = get<int>(l, "limit", "layouts");
    } else if (source == "inline") {
      c.layouts.kind = LayoutSource::Kind::inline_list;
      if (!l.contains("layouts") || !l["layouts"].is_array()) {
        throw ConfigError("inline layouts need a 'layouts' array");
      }
      for (const auto& g : l["layouts"]) {
        try {
          c.layouts.layouts.push_back(guidance_from_json(g));
        } catch (const GuidanceError& e) {
          throw ConfigError(std::string("inline layout: ") + e.what());
        }
      }
    } else {
      throw ConfigError("unknown layout source '" + source + "'");
    }
  }
  c.validate();
  return c;
}

BenchmarkConfig load_benchmark_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return benchmark_config_from_json(j);
}

namespace {

struct Task {
  std::uint64_t seed = 0;  // latent seed
  LayoutGuidance layout;
};

std::vector<Task> build_tasks(const BenchmarkConfig& c, BlockGrid grid) {
  std::vector<LayoutGuidance> fixed;
  if (c.layouts.kind == LayoutSource::Kind::coco) {
    for (auto& s : load_coco_layouts(c.layouts.path, grid)) {
      if (c.layouts.limit > 0 && static_cast<int>(fixed.size()) >= c.layouts.limit) break;
      fixed.push_back(std::move(s.guidance));
    }
    if (fixed.empty()) throw ConfigError("COCO file yields no layouts");
  } else if (c.layouts.kind == LayoutSource::Kind::inline_list) {
    fixed = c.layouts.layouts;
  }

  std::vector<Task> tasks;
  for (int s = 0; s < c.seeds; ++s) {
    const std::uint64_t latent_seed = derive_seed(c.benchmark_seed, static_cast<std::uint64_t>(s));
    if (c.layouts.kind == LayoutSource::Kind::synthetic) {
      for (const int n : c.layouts.object_counts) {
        const auto layout_seed = derive_seed(c.benchmark_seed, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(n));
        tasks.push_back({latent_seed, synthetic_layout(layout_seed, n, grid)});
      }
    } else {
      for (std::size_t i = 0; i < fixed.size(); ++i) {
        Task t{latent_seed, fixed[i]};
        t.layout.pairing_seed = derive_seed(latent_seed, i, 0x70616972);
        tasks.push_back(std::move(t));
      }
    }
  }
  return tasks;
}

bool uses_swap(Method m) {
  return m == Method::swap || m == Method::paint_swap || m == Method::soft_swap;
}

std::vector<std::vector<EvalRecord>> run_task(const Task& task, const BenchmarkConfig& c,
                                              const ToyModel& model) {
  constexpr Exec exec = Exec::serial;  // parallelism lives at the task level
  const LatentGrid z = sample_latent(kDefaultLatentSize, kDefaultLatentSize,
                                     kDefaultChannels, task.seed);
  const BlockGrid grid = z.blocks();
  const auto cats = task.layout.categories();
  const TokenSet tokens = model.prompt(cats);

  const double w_in = c.weight_in.value_or(default_weight_in(grid));
  const double w_out = c.weight_out.value_or(default_weight_out(w_in));

  std::optional<LatentGrid> swapped;
  std::vector<std::vector<EvalRecord>> out;
  for (const Method m : c.methods) {
    const LatentGrid* start = &z;
    if (uses_swap(m)) {
      if (!swapped) {
        swapped = layout_swap(z, tokens, model.weights(), task.layout,
                              task.layout.pairing_seed, exec).latent;
      }
      start = &*swapped;
    }
    std::optional<LogitBias> bias;
    if (m == Method::paint || m == Method::paint_swap) {
      bias = paint_bias(task.layout, tokens, grid, w_in);
    } else if (m == Method::soft || m == Method::soft_swap) {
      bias = soft_bias(task.layout, tokens, grid, w_in, w_out);
    }
    const auto result = generate(*start, tokens, model, c.sampler,
                                 bias ? &*bias : nullptr, exec);
    out.push_back(evaluate(detect(result.labels), task.layout, grid));
  }
  return out;
}

}  // namespace

BenchmarkResult run_benchmark(const BenchmarkConfig& config) {
  config.validate();
  const ToyModel model(config.params);
  const BlockGrid grid{kDefaultLatentSize / kDefaultBlockSize,
                       kDefaultLatentSize / kDefaultBlockSize};
  const auto tasks = build_tasks(config, grid);

  std::vector<std::vector<std::vector<EvalRecord>>> slots(tasks.size());
  std::string failure;
  const int workers = config.workers > 0 ? config.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    try {
      slots[i] = run_task(tasks[i], config, model);
    } catch (const std::exception& e) {
#pragma omp critical(noiseloom_bench_failure)
      if (failure.empty()) failure = e.what();
    }
  }
  if (!failure.empty()) throw ConfigError("benchmark task failed: " + failure);

  BenchmarkResult r;
  r.tasks = static_cast<int>(tasks.size());
  r.records.resize(config.methods.size());
  for (const auto& slot : slots)
    for (std::size_t m = 0; m < slot.size(); ++m)
      r.records[m].insert(r.records[m].end(), slot[m].begin(), slot[m].end());
  for (std::size_t m = 0; m < config.methods.size(); ++m)
    r.table.rows.push_back(summarize(to_string(config.methods[m]), r.records[m]));
  return r;
}

}  // namespace noiseloom
