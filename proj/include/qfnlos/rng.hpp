#pragma once

#include <cstdint>

namespace qfnlos {

/// splitmix64 step; also used to derive independent per-pixel streams.
std::uint64_t splitmix64(std::uint64_t& state);

/// xoshiro256** with splitmix64 seeding. Self-contained so draws are
/// bit-identical across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform in [0, 1), 53-bit resolution.
  double next_double();

 private:
  std::uint64_t s_[4];
};

/// Deterministic seed for the (i, j) pixel stream of a base seed.
std::uint64_t pixel_stream_seed(std::uint64_t base_seed, int i, int j);

/// Exact Poisson sampler. Knuth's product method for small means; larger
/// means split recursively as a sum of two Poisson halves.
std::uint64_t poisson_sample(Rng& rng, double mean);

}  // namespace qfnlos
