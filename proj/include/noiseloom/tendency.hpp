#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "noiseloom/sampler.hpp"
#include "noiseloom/toy_model.hpp"

namespace noiseloom {

// Two prompts sharing one category.
struct PromptPair {
  std::vector<std::string> first;
  std::vector<std::string> second;
  std::string shared;
};

// {c1, c2} and {c1, c3} with three distinct names from the vocabulary.
PromptPair random_prompt_pair(std::uint64_t seed, std::span<const std::string> vocab);

// IoU of the blocks labelled `category` in each map; undefined when neither
// map contains it.
std::optional<double> mask_iou(const LabelMap& a, const LabelMap& b,
                               const std::string& category);

// Share of blocks whose label differs, over blocks that are foreground in at
// least one map; undefined when both maps are all background.
std::optional<double> label_disagreement(const LabelMap& a, const LabelMap& b);

struct TendencyCase {
  std::uint64_t seed = 0;
  PromptPair pair;
  std::optional<double> same_latent;  // IoU of the shared mask, same z_T
  std::optional<double> control;      // same prompt, independent z_T
};

struct TendencyReport {
  std::vector<TendencyCase> cases;
  double mean_same_latent = 0.0;  // over defined values
  double mean_control = 0.0;
  int defined_same_latent = 0;
  int defined_control = 0;
};

// For each seed: generate both prompts of its pair from one z_T and compare
// the shared category's masks; the control compares the first prompt on z_T
// against an independently seeded latent.
TendencyReport tendency_probe(const ToyModel& model,
                              std::span<const std::uint64_t> seeds,
                              std::span<const PromptPair> pairs,
                              SamplerKind sampler = SamplerKind::plms);

}  // namespace noiseloom
