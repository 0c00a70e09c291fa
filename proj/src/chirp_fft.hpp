#pragma once

#include <complex>
#include <cstddef>

#include "qfnlos/deconvolve.hpp"
#include "qfnlos/memory_ledger.hpp"

#include <mutex>

namespace qfnlos::detail {

/// Guards FFTW plan creation/destruction; executions need no lock.
std::mutex& fftw_planner_mutex();

/// Smallest 5-smooth integer >= n (efficient FFT length).
int next_fast_len(int n);

/// Resolved per-axis deconvolution geometry.
struct AxisPlan {
  int field_len = 0;
  int half_extent = 0;  // kernel taps cover [-half_extent, half_extent]
  int padded_len = 0;   // transform length
};

AxisPlan resolve_axis(int field_len, int kernel_taps, PaddingMode padding);

/// In-place separable chirp deconvolution:
///   data <- pitch^2 / (16 pi^2 s^4) * (chirp_x (x) chirp_y) * data
/// via one FFT convolution pass per axis. `data` is row-major [nx][ny].
/// Works on float or double storage; all kernel values are computed in
/// double and rounded once into the working precision.
template <typename Real>
void separable_chirp_deconvolve_inplace(std::complex<Real>* data, int nx, int ny,
                                        double pitch, double s,
                                        const DeconvOptions& opts,
                                        MemoryLedger* ledger = nullptr);

extern template void separable_chirp_deconvolve_inplace<float>(
    std::complex<float>*, int, int, double, double, const DeconvOptions&,
    MemoryLedger*);
extern template void separable_chirp_deconvolve_inplace<double>(
    std::complex<double>*, int, int, double, double, const DeconvOptions&,
    MemoryLedger*);

}  // namespace qfnlos::detail
