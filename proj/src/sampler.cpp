#include "noiseloom/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "noiseloom/error.hpp"

namespace noiseloom {

NoiseSchedule make_schedule(int steps, double beta_start, double beta_end) {
  if (steps < 1) throw ConfigError("schedule needs at least one step");
  if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0)) {
    throw ConfigError("betas must satisfy 0 < beta_start <= beta_end < 1");
  }
  NoiseSchedule s;
  s.betas.resize(steps);
  s.alpha_bars.resize(steps);
  double prod = 1.0;
  for (int t = 0; t < steps; ++t) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(t) / (steps - 1);
    s.betas[t] = beta_start + (beta_end - beta_start) * frac;
    prod *= 1.0 - s.betas[t];
    s.alpha_bars[t] = prod;
  }
  s.timesteps.resize(steps);
  std::iota(s.timesteps.rbegin(), s.timesteps.rend(), 0);
  return s;
}

NoiseSchedule default_schedule(int steps) {
  if (steps < 1) throw ConfigError("schedule needs at least one step");
  const double scale = 1000.0 / steps;
  return make_schedule(steps, std::min(1e-4 * scale, 0.5),
                       std::min(2e-2 * scale, 0.5));
}

const char* to_string(SamplerKind kind) {
  return kind == SamplerKind::ddim ? "ddim" : "plms";
}

SamplerKind parse_sampler(const std::string& name) {
  if (name == "ddim") return SamplerKind::ddim;
  if (name == "plms") return SamplerKind::plms;
  throw ConfigError("unknown sampler '" + name + "' (expected ddim or plms)");
}

namespace {

void check_step(const LatentGrid& a, const LatentGrid& b, int t, int t_prev,
                const NoiseSchedule& sched) {
  if (!a.same_shape(b)) {
    throw GeometryError("latent and noise estimate shapes differ");
  }
  if (t <= t_prev || t >= sched.steps() || t_prev < -1) {
    throw ConfigError("invalid step " + std::to_string(t) + " -> " +
                      std::to_string(t_prev));
  }
}

}  // namespace

LatentGrid ddim_step(const LatentGrid& z_t, const LatentGrid& eps, int t,
                     int t_prev, const NoiseSchedule& sched, Exec exec) {
  check_step(z_t, eps, t, t_prev, sched);
  LatentGrid out = z_t;
  kernels::ddim_update(z_t.values(), eps.values(), sched.alpha_bar(t),
                       sched.alpha_bar(t_prev), out.values(), exec);
  return out;
}

MultistepWeights multistep_weights(int order) {
  MultistepWeights w;
  switch (order) {
    case 1: w = {{1.0}, 1.0}; break;
    case 2: w = {{3.0, -1.0}, 2.0}; break;
    case 3: w = {{23.0, -16.0, 5.0}, 12.0}; break;
    case 4: w = {{55.0, -59.0, 37.0, -9.0}, 24.0}; break;
    default: throw ConfigError("multistep order must be 1..4");
  }
  const double sum = std::accumulate(w.numerators.begin(), w.numerators.end(), 0.0);
  if (sum != w.denominator) throw ConfigError("multistep weights do not sum to 1");
  return w;
}

LatentGrid plms_effective_eps(const SamplerState& state,
                              const LatentGrid& eps_new, Exec exec) {
  const int order = static_cast<int>(state.history.size()) + 1;
  const auto w = multistep_weights(order);
  std::vector<std::span<const float>> hist;
  hist.reserve(order);
  hist.push_back(eps_new.values());
  for (const auto& e : state.history) {
    if (!e.same_shape(eps_new)) throw GeometryError("eps history shape mismatch");
    hist.push_back(e.values());
  }
  LatentGrid out = eps_new;
  kernels::multistep_combine(hist, w.numerators, w.denominator, out.values(), exec);
  return out;
}

SamplerState plms_step(const SamplerState& state, const LatentGrid& eps_new,
                       int t, int t_prev, const NoiseSchedule& sched,
                       Exec exec) {
  check_step(state.latent, eps_new, t, t_prev, sched);
  const LatentGrid eff = plms_effective_eps(state, eps_new, exec);
  SamplerState next;
  next.latent = ddim_step(state.latent, eff, t, t_prev, sched, exec);
  next.cursor = state.cursor + 1;
  next.history = state.history;
  next.history.push_front(eps_new);
  if (next.history.size() > SamplerState::kMaxHistory) next.history.pop_back();
  return next;
}

LatentGrid run_sampler(const LatentGrid& z_T, const NoisePredictor& predictor,
                       const NoiseSchedule& sched, SamplerKind kind,
                       Exec exec) {
  SamplerState state;
  state.latent = z_T;
  const auto& ts = sched.timesteps;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const int t = ts[k];
    const int t_prev = k + 1 < ts.size() ? ts[k + 1] : -1;
    const LatentGrid eps = predictor.predict(state.latent, {t, sched.alpha_bar(t)});
    if (kind == SamplerKind::ddim) {
      state.latent = ddim_step(state.latent, eps, t, t_prev, sched, exec);
      ++state.cursor;
    } else {
      state = plms_step(state, eps, t, t_prev, sched, exec);
    }
  }
  state.latent.set_seed(z_T.seed());
  return state.latent;
}

}  // namespace noiseloom
