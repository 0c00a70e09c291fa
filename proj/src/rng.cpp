#include "qfnlos/rng.hpp"

#include <cmath>

#include "qfnlos/errors.hpp"

namespace qfnlos {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& word : s_) word = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t pixel_stream_seed(std::uint64_t base_seed, int i, int j) {
  std::uint64_t state = base_seed;
  state ^= 0x6a09e667f3bcc909ULL + (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) +
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(j));
  std::uint64_t mixed = splitmix64(state);
  return splitmix64(state) ^ mixed;
}

std::uint64_t poisson_sample(Rng& rng, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean))
    throw ParameterError("poisson_sample: mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  // Sum-splitting keeps exp(-mean) away from underflow; a Poisson(m) draw is
  // the sum of two independent Poisson(m/2) draws.
  if (mean > 60.0) {
    const double half = mean * 0.5;
    return poisson_sample(rng, half) + poisson_sample(rng, mean - half);
  }
  const double limit = std::exp(-mean);
  std::uint64_t count = 0;
  double product = rng.next_double();
  while (product > limit) {
    ++count;
    product *= rng.next_double();
  }
  return count;
}

}  // namespace qfnlos
