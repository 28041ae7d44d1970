#pragma once

#include <cstdint>

namespace noiseloom {

// Purpose tags partition the counter space so independent uses of the same
// user seed never share a stream.
enum class StreamTag : std::uint64_t {
  latent = 0x4c41544e,     // latent values (sample_latent, resample_region)
  pairing = 0x50414952,    // swap pairing shuffles
  vocab = 0x564f4341,      // token embeddings
  weights = 0x57474854,    // frozen projection weights
  layout = 0x4c41594f,     // synthetic benchmark layouts
  bench = 0x42454e43,      // benchmark per-task seeds
};

std::uint64_t mix64(std::uint64_t x);

// Counter-based generator: every draw is a pure function of
// (seed, tag, counter), so any subset of a stream can be regenerated
// without touching the rest.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, StreamTag tag);

  std::uint64_t bits(std::uint64_t counter) const;
  // Uniform in (0, 1).
  double uniform(std::uint64_t counter) const;
  // Standard normal via Box-Muller on two sub-counters of `counter`.
  double normal(std::uint64_t counter) const;
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t counter, std::uint64_t bound) const;

 private:
  std::uint64_t key_;
};

// Stable derived seed for child streams, e.g. per benchmark task.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                          std::uint64_t b = 0);

}  // namespace noiseloom
