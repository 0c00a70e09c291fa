#pragma once

#include <cstdint>
#include <vector>

#include "qfnlos/memory_ledger.hpp"
#include "qfnlos/types.hpp"

namespace qfnlos {

enum class DepthEstimator {
  kPhaseRatio,  // d^2 = (-arg(psi1/psi2) mod 2pi) / beta; normative
  kDerivative,  // central difference of Alg. step 3's derivative formula
};

struct DepthOptions {
  double albedo_rel_threshold = 0.1;  // validity cutoff, fraction of max |psi1|
  DepthEstimator estimator = DepthEstimator::kPhaseRatio;
};

struct DepthResult {
  std::vector<double> depth;
  std::vector<std::uint8_t> valid;
};

/// a(x) = |psi(x; s)| per pixel.
std::vector<double> extract_albedo(const ModulatedAlbedo& psi);

/// Depth from two fields at nearby s values. Requires s1 < s2 and matching
/// grids. Invalid pixels (|psi1| below threshold) get depth 0.
DepthResult extract_depth(const ModulatedAlbedo& psi1, const ModulatedAlbedo& psi2,
                          const DepthOptions& opts = {});

/// Albedo + depth + mask in one pass; albedo from psi1.
Reconstruction extract_reconstruction(const ModulatedAlbedo& psi1,
                                      const ModulatedAlbedo& psi2,
                                      const DepthOptions& opts = {},
                                      MemoryLedger* ledger = nullptr);

/// beta = 1/(4 s1^2) - 1/(4 s2^2); the unambiguous depth-squared range is
/// [0, 2 pi / beta).
double unambiguous_beta(double s1, double s2);
bool unambiguous_range_ok(double d_max, double s1, double s2);

/// Default s-spacing: largest ds with d_max^2 * ds / (2 s^3) <= pi, i.e. half
/// the unambiguous range at the linearized beta.
double default_ds(double s, double d_max);

/// Frequency-domain Wiener attenuation H = P / (P + npr * Pbar) with P the
/// albedo periodogram and Pbar its mean over nonzero frequencies; DC is kept.
/// noise_power_ratio = 0 returns the input unchanged.
std::vector<double> wiener_post_filter(const std::vector<double>& albedo, int nx,
                                       int ny, double noise_power_ratio);

}  // namespace qfnlos
