#include "qfnlos/deconvolve.hpp"

#include <cmath>
#include <vector>

#include "qfnlos/errors.hpp"
#include "chirp_fft.hpp"

namespace qfnlos {

std::vector<std::complex<double>> chirp_kernel_1d(int half_extent, double pitch,
                                                  double s) {
  if (half_extent < 0)
    throw ParameterError("chirp_kernel_1d: half_extent must be >= 0");
  if (!(pitch > 0.0)) throw ParameterError("chirp_kernel_1d: pitch must be positive");
  if (!(s > 0.0)) throw ParameterError("chirp_kernel_1d: s must be positive");
  const double inv4s2 = 1.0 / (4.0 * s * s);
  std::vector<std::complex<double>> taps(2 * static_cast<std::size_t>(half_extent) + 1);
  for (int m = -half_extent; m <= half_extent; ++m) {
    const double u = m * pitch;
    const double phase = u * u * inv4s2;
    taps[static_cast<std::size_t>(m + half_extent)] =
        std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return taps;
}

ModulatedAlbedo deconvolve_fft(const AggregatedField& phi, const DeconvOptions& opts,
                               MemoryLedger* ledger) {
  const WallGrid& grid = phi.grid();
  std::vector<std::complex<double>> data(phi.data().begin(), phi.data().end());
  if (ledger != nullptr)
    ledger->note("psi_field", data.size(), data.size() * sizeof(std::complex<double>));
  detail::separable_chirp_deconvolve_inplace<double>(
      data.data(), grid.nx(), grid.ny(), grid.pitch(), phi.s(), opts, ledger);
  return ModulatedAlbedo(grid, phi.s(), std::move(data));
}

ModulatedAlbedo deconvolve_direct(const AggregatedField& phi,
                                  const DeconvOptions& opts) {
  const WallGrid& grid = phi.grid();
  const int nx = grid.nx();
  const int ny = grid.ny();
  const double pitch = grid.pitch();
  const double s = phi.s();
  const detail::AxisPlan ax = detail::resolve_axis(nx, opts.kernel_taps_x, opts.padding);
  const detail::AxisPlan ay = detail::resolve_axis(ny, opts.kernel_taps_y, opts.padding);
  const auto kx = chirp_kernel_1d(ax.half_extent, pitch, s);
  const auto ky = chirp_kernel_1d(ay.half_extent, pitch, s);

  // Effective per-axis tap at a (possibly wrapped) offset. In circular mode
  // taps that alias to the same residue add up, mirroring the FFT embedding.
  const auto axis_tap = [&](const std::vector<std::complex<double>>& taps,
                            int half_extent, int wrap_len, int offset) {
    std::complex<double> v(0.0, 0.0);
    if (opts.padding == PaddingMode::kFull) {
      if (offset >= -half_extent && offset <= half_extent)
        v = taps[static_cast<std::size_t>(offset + half_extent)];
      return v;
    }
    for (int m = -half_extent; m <= half_extent; ++m) {
      if (((m - offset) % wrap_len + wrap_len) % wrap_len == 0)
        v += taps[static_cast<std::size_t>(m + half_extent)];
    }
    return v;
  };

  const double s2 = s * s;
  const double scale = pitch * pitch / (16.0 * kPi * kPi * s2 * s2);
  std::vector<std::complex<double>> out(grid.pixel_count());
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      std::complex<double> acc(0.0, 0.0);
      for (int ii = 0; ii < nx; ++ii) {
        const std::complex<double> tap_x = axis_tap(kx, ax.half_extent, nx, ii - i);
        if (tap_x == std::complex<double>(0.0, 0.0)) continue;
        for (int jj = 0; jj < ny; ++jj) {
          const std::complex<double> tap_y = axis_tap(ky, ay.half_extent, ny, jj - j);
          acc += tap_x * tap_y * phi.at(ii, jj);
        }
      }
      out[grid.flat(i, j)] = scale * acc;
    }
  }
  return ModulatedAlbedo(grid, s, std::move(out));
}

}  // namespace qfnlos
