#include "noiseloom/tendency.hpp"

#include "noiseloom/error.hpp"
#include "noiseloom/rng.hpp"

namespace noiseloom {

PromptPair random_prompt_pair(std::uint64_t seed, std::span<const std::string> vocab) {
  if (vocab.size() < 3) throw ConfigError("prompt pairs need three distinct categories");
  const CounterRng rng(seed, StreamTag::layout);
  std::vector<std::string> pool(vocab.begin(), vocab.end());
  for (std::size_t i = 0; i < 3; ++i) {
    const auto j = i + rng.below(i, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  return {{pool[0], pool[1]}, {pool[0], pool[2]}, pool[0]};
}

std::optional<double> mask_iou(const LabelMap& a, const LabelMap& b,
                               const std::string& category) {
  if (a.grid != b.grid) throw GeometryError("label maps differ in size");
  int ia = -1, ib = -1;
  for (std::size_t i = 0; i < a.categories.size(); ++i)
    if (a.categories[i] == category) ia = static_cast<int>(i);
  for (std::size_t i = 0; i < b.categories.size(); ++i)
    if (b.categories[i] == category) ib = static_cast<int>(i);
  int inter = 0, uni = 0;
  for (int k = 0; k < a.grid.size(); ++k) {
    const bool in_a = ia >= 0 && a.labels[k] == ia;
    const bool in_b = ib >= 0 && b.labels[k] == ib;
    inter += in_a && in_b;
    uni += in_a || in_b;
  }
  if (uni == 0) return std::nullopt;
  return static_cast<double>(inter) / uni;
}

std::optional<double> label_disagreement(const LabelMap& a, const LabelMap& b) {
  if (a.grid != b.grid) throw GeometryError("label maps differ in size");
  int differ = 0, considered = 0;
  for (int k = 0; k < a.grid.size(); ++k) {
    const int la = a.labels[k], lb = b.labels[k];
    if (la == kBackgroundLabel && lb == kBackgroundLabel) continue;
    ++considered;
    const bool same = la != kBackgroundLabel && lb != kBackgroundLabel &&
                      a.categories[la] == b.categories[lb];
    differ += !same;
  }
  if (considered == 0) return std::nullopt;
  return static_cast<double>(differ) / considered;
}

TendencyReport tendency_probe(const ToyModel& model, std::span<const std::uint64_t> seeds,
                              std::span<const PromptPair> pairs, SamplerKind sampler) {
  if (seeds.size() != pairs.size()) throw ConfigError("one prompt pair per seed");
  TendencyReport report;
  report.cases.resize(seeds.size());
  std::string failure;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    try {
      constexpr Exec exec = Exec::serial;
      auto& c = report.cases[i];
      c.seed = seeds[i];
      c.pair = pairs[i];
      const auto z = sample_latent(kDefaultLatentSize, kDefaultLatentSize, kDefaultChannels, seeds[i]);
      const auto z_other = sample_latent(kDefaultLatentSize, kDefaultLatentSize,
                                         kDefaultChannels, derive_seed(seeds[i], 0x6374726c));
      const auto t1 = model.prompt(c.pair.first);
      const auto t2 = model.prompt(c.pair.second);
      const auto a = generate(z, t1, model, sampler, nullptr, exec);
      const auto b = generate(z, t2, model, sampler, nullptr, exec);
      const auto ctrl = generate(z_other, t1, model, sampler, nullptr, exec);
      c.same_latent = mask_iou(a.labels, b.labels, c.pair.shared);
      c.control = mask_iou(a.labels, ctrl.labels, c.pair.shared);
    } catch (const std::exception& e) {
#pragma omp critical(noiseloom_probe_failure)
      if (failure.empty()) failure = e.what();
    }
  }
  if (!failure.empty()) throw ConfigError("tendency probe failed: " + failure);
  for (const auto& c : report.cases) {
    if (c.same_latent) {
      report.mean_same_latent += *c.same_latent;
      ++report.defined_same_latent;
    }
    if (c.control) {
      report.mean_control += *c.control;
      ++report.defined_control;
    }
  }
  if (report.defined_same_latent) report.mean_same_latent /= report.defined_same_latent;
  if (report.defined_control) report.mean_control /= report.defined_control;
  return report;
}

}  // namespace noiseloom
