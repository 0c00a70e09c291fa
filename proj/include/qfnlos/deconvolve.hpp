#pragma once

#include <complex>
#include <vector>

#include "qfnlos/memory_ledger.hpp"
#include "qfnlos/types.hpp"

namespace qfnlos {

enum class PaddingMode {
  kFull,  // zero-pad so the convolution is linear; output centrally cropped
  kNone,  // circular convolution at the field size (FFT-size experiments only)
};

struct DeconvOptions {
  PaddingMode padding = PaddingMode::kFull;
  /// 0 = matched: kernel taps cover every offset occurring on the grid,
  /// half extent nx-1 (resp. ny-1). Explicit values must be odd tap counts.
  int kernel_taps_x = 0;
  int kernel_taps_y = 0;
};

/// Separable 1-D chirp: entry m in [-half_extent, half_extent] equals
/// exp(i (m * pitch)^2 / (4 s^2)).
std::vector<std::complex<double>> chirp_kernel_1d(int half_extent, double pitch,
                                                  double s);

/// psi[i][j] = pitch^2 / (16 pi^2 s^4) *
///             sum over (i~, j~) of exp(i ||x~ - x||^2 / (4 s^2)) phi[i~][j~],
/// computed as two rank-1 FFT convolution passes with the separable chirp.
ModulatedAlbedo deconvolve_fft(const AggregatedField& phi,
                               const DeconvOptions& opts = {},
                               MemoryLedger* ledger = nullptr);

/// Same definition by direct summation in row-major order. Reference oracle;
/// O(N^4), intended for N <= 64.
ModulatedAlbedo deconvolve_direct(const AggregatedField& phi,
                                  const DeconvOptions& opts = {});

}  // namespace qfnlos
