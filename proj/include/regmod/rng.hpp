// Deterministic random number generation.
//
// Experiments must reproduce bit-identically from a seed, so normal deviates
// are produced by an explicit Box-Muller transform over mt19937_64 output
// rather than std::normal_distribution (whose algorithm is
// implementation-defined). Named sub-streams keep supports, signs, signal
// perturbation, and measurement noise independent: changing the noise level
// never perturbs the signal draw.
#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace regmod {

// Derives the generator seed for (seed, tag). splitmix64 over the base seed
// mixed with an FNV-1a hash of the tag.
uint64_t substream_seed(uint64_t seed, std::string_view tag);

class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}
  Rng(uint64_t seed, std::string_view tag) : gen_(substream_seed(seed, tag)) {}

  uint64_t next() { return gen_(); }

  // Uniform on (0, 1); never returns 0 so log() below is safe.
  double uniform01();

  // Standard normal via Box-Muller; the paired deviate is cached.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Uniform integer in [0, n), rejection sampled (no modulo bias).
  int uniform_int(int n);

  // +1.0 or -1.0 with equal probability.
  double sign() { return (next() & 1u) ? 1.0 : -1.0; }

  // Sorted k-subset of {0, ..., n-1} via partial Fisher-Yates.
  std::vector<int> subset(int n, int k);

 private:
  std::mt19937_64 gen_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace regmod
