#pragma once

#include <cstdint>
#include <functional>

#include "qfnlos/types.hpp"

namespace qfnlos {

enum class DepositRule {
  kNearestBin,   // all mass into the bin containing the round-trip path
  kLinearSplit,  // mass split linearly across the two neighboring bins
};

enum class NoiseModel { kNone, kPoisson };

struct RenderOptions {
  DepositRule deposit = DepositRule::kLinearSplit;
  NoiseModel noise = NoiseModel::kNone;
  double exposure_scale = 0.0;  // Poisson mean per unit of histogram value
  std::uint64_t rng_seed = 0;
};

struct ClipReport {
  std::uint64_t clipped_deposits = 0;
  std::uint64_t total_deposits = 0;
};

/// Confocal transient forward render of a surfel scene. Deposits, per surfel
/// and wall pixel at distance r, the mass a * (2 / bin_length) * r^-k at
/// round-trip path 2r. Deposits falling outside [0, nt) are dropped and
/// counted in `clip`.
TransientHistogram render_histogram(const SceneSurfels& scene, const WallGrid& grid,
                                    int nt, double bin_length, int falloff_k,
                                    const RenderOptions& opts = {},
                                    ClipReport* clip = nullptr);

/// Closed-form aggregated field of a surfel scene:
/// phi(x; s) = sum_p a_p * exp(-i ||(x,0) - p||^2 / (4 s^2)).
/// Continuous-time oracle for the histogram + aggregation path.
AggregatedField render_phi_analytic(const SceneSurfels& scene, const WallGrid& grid,
                                    double s, int falloff_k);

/// Synthetic photon events: for each (surfel, pixel) pair, a Poisson count
/// with mean `mean_photons_per_surfel_pixel * a * r^-k / Z`, Z chosen so the
/// largest mean equals the given one; every event carries tof_path = 2r.
PhotonEventList render_events(const SceneSurfels& scene, const WallGrid& grid,
                              int falloff_k, double mean_photons_per_surfel_pixel,
                              std::uint64_t rng_seed);

/// Streaming form of render_events: emits events through `sink` without
/// materializing a list. Same draws as render_events for the same seed.
void for_each_synthetic_event(
    const SceneSurfels& scene, const WallGrid& grid, int falloff_k,
    double mean_photons_per_surfel_pixel, std::uint64_t rng_seed,
    const std::function<void(std::uint32_t, std::uint32_t, double)>& sink);

}  // namespace qfnlos
