#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "noiseloom/attention.hpp"
#include "noiseloom/latent.hpp"
#include "noiseloom/mask_guidance.hpp"
#include "noiseloom/sampler.hpp"

namespace noiseloom {

struct ToyModelParams {
  std::uint64_t engine_seed = 0;
  std::uint64_t vocab_seed = 0;
  WeightConfig weights;
  double attention_strength = 1.0;   // eta
  int smoothing_radius = 1;          // r, in blocks
  double smoothing_weight = 0.2;     // share of the box mean in the target
  int steps = kDefaultSteps;
  double background_threshold = 0.3; // theta_bg
  double background_logit = 2.0;     // prior of the <bg> sink

  void validate() const;
  friend bool operator==(const ToyModelParams&, const ToyModelParams&) = default;
};

nlohmann::json params_to_json(const ToyModelParams& p);
// Missing keys keep their defaults; unknown keys are rejected.
ToyModelParams params_from_json(const nlohmann::json& j);

// Frozen model: parameters, projection weights and schedule.
class ToyModel {
 public:
  explicit ToyModel(ToyModelParams params = {});

  const ToyModelParams& params() const { return params_; }
  const ProjectionWeights& weights() const { return weights_; }
  const NoiseSchedule& schedule() const { return schedule_; }
  // <bg> followed by the categories.
  TokenSet prompt(std::span<const std::string> categories) const;

 private:
  ToyModelParams params_;
  ProjectionWeights weights_;
  NoiseSchedule schedule_;
};

// eps such that the DDIM x0 estimate equals the attention target
// g_b = eta * sum_i A_bi * (W_V tau_i), blended with its box mean.
class ToyPredictor : public NoisePredictor {
 public:
  ToyPredictor(const TokenSet& tokens, const ToyModel& model,
               const LogitBias* bias = nullptr, Exec exec = Exec::parallel);
  LatentGrid predict(const LatentGrid& z, const StepContext& step) const override;
  // The per-block target g' for z, blocks x channels.
  std::vector<double> target(const LatentGrid& z) const;

 private:
  const TokenSet& tokens_;
  const ToyModel& model_;
  const LogitBias* bias_;
  Exec exec_;
  std::vector<double> values_;  // K x C
};

inline constexpr int kBackgroundLabel = -1;

struct LabelMap {
  BlockGrid grid;
  std::vector<std::string> categories;
  std::vector<int> labels;  // index into categories, or kBackgroundLabel

  int at(BlockCoord c) const { return labels[grid.index(c)]; }
  int count(int label) const;
  friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

// Cosine of each block mean against every token's value vector; argmax wins
// when it reaches theta_bg and is not the background sink.
LabelMap render_label_map(const LatentGrid& z, const TokenSet& tokens,
                          const ProjectionWeights& w, double theta_bg,
                          Exec exec = Exec::parallel);

struct Provenance {
  std::uint64_t seed = 0;
  std::vector<std::string> prompt;
  SamplerKind sampler = SamplerKind::plms;
  int steps = 0;
  std::vector<std::string> edits;
};

struct GenerationResult {
  LatentGrid final_latent;
  LabelMap labels;
  AttentionMap step0;  // unbiased tendency of z_T
  Provenance provenance;
};

GenerationResult generate(const LatentGrid& z_T, const TokenSet& tokens,
                          const ToyModel& model, SamplerKind sampler,
                          const LogitBias* bias = nullptr,
                          Exec exec = Exec::parallel);

bool bitwise_equal(const GenerationResult& a, const GenerationResult& b);

nlohmann::json label_map_to_json(const LabelMap& m);
nlohmann::json generation_to_json(const GenerationResult& r);

// Grayscale: (label + 1) * 255 / K, background 0.
void write_label_pgm(std::ostream& out, const LabelMap& m);
// RGB with a fixed palette, one pixel per block scaled by `cell` pixels.
std::string label_png(const LabelMap& m, int cell = 8);
void write_label_png(const std::string& path, const LabelMap& m, int cell = 8);

}  // namespace noiseloom
