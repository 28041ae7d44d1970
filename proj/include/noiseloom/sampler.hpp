#pragma once

#include <deque>
#include <string>
#include <vector>

#include "noiseloom/kernels.hpp"
#include "noiseloom/latent.hpp"

namespace noiseloom {

inline constexpr int kDefaultSteps = 50;

struct NoiseSchedule {
  std::vector<double> betas;
  std::vector<double> alpha_bars;   // cumulative products, index t
  std::vector<int> timesteps;       // visited in this order, decreasing

  int steps() const { return static_cast<int>(betas.size()); }
  // alpha_bar(-1) is the clean endpoint, 1.
  double alpha_bar(int t) const { return t < 0 ? 1.0 : alpha_bars.at(t); }
};

// Linear betas from beta_start to beta_end over T steps.
NoiseSchedule make_schedule(int steps, double beta_start, double beta_end);
// Linear 1e-4 -> 2e-2 rescaled by 1000/T (capped at 0.5).
NoiseSchedule default_schedule(int steps = kDefaultSteps);

// Per-step context handed to a noise predictor.
struct StepContext {
  int t = 0;
  double alpha_bar = 0.0;
};

class NoisePredictor {
 public:
  virtual ~NoisePredictor() = default;
  // Must be deterministic: equal inputs give bitwise-equal outputs.
  virtual LatentGrid predict(const LatentGrid& z, const StepContext& step) const = 0;
};

enum class SamplerKind { ddim, plms };
const char* to_string(SamplerKind kind);
SamplerKind parse_sampler(const std::string& name);

LatentGrid ddim_step(const LatentGrid& z_t, const LatentGrid& eps, int t,
                     int t_prev, const NoiseSchedule& sched,
                     Exec exec = Exec::parallel);

// Linear multistep weights for the given history depth (1..4), as integer
// numerators over a common denominator. Every row sums to the denominator.
struct MultistepWeights {
  std::vector<double> numerators;  // newest first
  double denominator = 1.0;
};
MultistepWeights multistep_weights(int order);

struct SamplerState {
  LatentGrid latent;
  int cursor = 0;                 // index into schedule.timesteps
  std::deque<LatentGrid> history;  // past eps estimates, most recent first
  static constexpr std::size_t kMaxHistory = 3;
};

LatentGrid plms_effective_eps(const SamplerState& state,
                              const LatentGrid& eps_new,
                              Exec exec = Exec::parallel);

SamplerState plms_step(const SamplerState& state, const LatentGrid& eps_new,
                       int t, int t_prev, const NoiseSchedule& sched,
                       Exec exec = Exec::parallel);

LatentGrid run_sampler(const LatentGrid& z_T, const NoisePredictor& predictor,
                       const NoiseSchedule& sched, SamplerKind kind,
                       Exec exec = Exec::parallel);

}  // namespace noiseloom
