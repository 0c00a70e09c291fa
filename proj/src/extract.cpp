#include "qfnlos/extract.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

#include "qfnlos/errors.hpp"
#include "chirp_fft.hpp"
#include "parallel.hpp"

namespace qfnlos {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

void validate_pair(const ModulatedAlbedo& psi1, const ModulatedAlbedo& psi2) {
  if (!(psi2.s() > psi1.s()))
    throw ParameterError("extract_depth: requires s2 > s1 (got s1 = " +
                         std::to_string(psi1.s()) + ", s2 = " +
                         std::to_string(psi2.s()) + ")");
  if (!(psi1.grid() == psi2.grid()))
    throw DataError("extract_depth: psi1 and psi2 live on different grids");
}

double max_modulus(std::span<const std::complex<double>> data) {
  double best = 0.0;
  for (const auto& z : data) best = std::max(best, std::abs(z));
  return best;
}

/// Phase-ratio depth: d^2 = (-arg(psi1 * conj(psi2)) mod 2pi) / beta.
inline double depth_phase_ratio(std::complex<double> z1, std::complex<double> z2,
                                double beta) {
  const std::complex<double> ratio = z1 * std::conj(z2);
  double wrapped = std::fmod(-std::arg(ratio), kTwoPi);
  if (wrapped < 0.0) wrapped += kTwoPi;
  return std::sqrt(wrapped / beta);
}

/// Alg. step 3's derivative form at the midpoint; accurate for d^2 beta << 1.
inline double depth_derivative(std::complex<double> z1, std::complex<double> z2,
                               double s1, double s2) {
  const double s_mid = 0.5 * (s1 + s2);
  const std::complex<double> psi_mid = 0.5 * (z1 + z2);
  if (psi_mid == std::complex<double>(0.0, 0.0)) return 0.0;
  const std::complex<double> dpsi_ds = (z2 - z1) / (s2 - s1);
  const std::complex<double> d2 =
      std::complex<double>(0.0, -2.0) * (s_mid * s_mid * s_mid) * dpsi_ds / psi_mid;
  return std::sqrt(std::max(d2.real(), 0.0));
}

}  // namespace

std::vector<double> extract_albedo(const ModulatedAlbedo& psi) {
  std::vector<double> albedo(psi.data().size());
  const auto data = psi.data();
  detail::parallel_for(albedo.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) albedo[i] = std::abs(data[i]);
  });
  return albedo;
}

double unambiguous_beta(double s1, double s2) {
  if (!(s1 > 0.0) || !(s2 > s1))
    throw ParameterError("unambiguous_beta: requires 0 < s1 < s2");
  return 1.0 / (4.0 * s1 * s1) - 1.0 / (4.0 * s2 * s2);
}

bool unambiguous_range_ok(double d_max, double s1, double s2) {
  return d_max * d_max * unambiguous_beta(s1, s2) < kTwoPi;
}

double default_ds(double s, double d_max) {
  if (!(s > 0.0)) throw ParameterError("default_ds: s must be positive");
  if (!(d_max > 0.0)) throw ParameterError("default_ds: d_max must be positive");
  return kTwoPi * s * s * s / (d_max * d_max);
}

DepthResult extract_depth(const ModulatedAlbedo& psi1, const ModulatedAlbedo& psi2,
                          const DepthOptions& opts) {
  validate_pair(psi1, psi2);
  if (!(opts.albedo_rel_threshold > 0.0) || !(opts.albedo_rel_threshold < 1.0))
    throw ParameterError("extract_depth: albedo_rel_threshold must be in (0, 1)");

  const auto z1 = psi1.data();
  const auto z2 = psi2.data();
  const double beta = unambiguous_beta(psi1.s(), psi2.s());
  const double cutoff = opts.albedo_rel_threshold * max_modulus(z1);

  DepthResult result;
  result.depth.assign(z1.size(), 0.0);
  result.valid.assign(z1.size(), 0);
  detail::parallel_for(z1.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (!(std::abs(z1[i]) >= cutoff)) continue;
      result.valid[i] = 1;
      result.depth[i] = opts.estimator == DepthEstimator::kPhaseRatio
                            ? depth_phase_ratio(z1[i], z2[i], beta)
                            : depth_derivative(z1[i], z2[i], psi1.s(), psi2.s());
    }
  });
  return result;
}

Reconstruction extract_reconstruction(const ModulatedAlbedo& psi1,
                                      const ModulatedAlbedo& psi2,
                                      const DepthOptions& opts,
                                      MemoryLedger* ledger) {
  auto albedo = extract_albedo(psi1);
  auto depth = extract_depth(psi1, psi2, opts);
  if (ledger != nullptr) {
    ledger->note("albedo_map", albedo.size(), albedo.size() * sizeof(double));
    ledger->note("depth_map", depth.depth.size(), depth.depth.size() * sizeof(double));
    ledger->note("valid_mask", depth.valid.size(),
                 depth.valid.size() * sizeof(std::uint8_t));
  }
  return Reconstruction{psi1.grid(), std::move(albedo), std::move(depth.depth),
                        std::move(depth.valid)};
}

std::vector<double> wiener_post_filter(const std::vector<double>& albedo, int nx,
                                       int ny, double noise_power_ratio) {
  if (nx < 1 || ny < 1 ||
      albedo.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny))
    throw DataError("wiener_post_filter: map size does not match nx * ny");
  if (!(noise_power_ratio >= 0.0))
    throw ParameterError("wiener_post_filter: noise_power_ratio must be >= 0");
  if (noise_power_ratio == 0.0) return albedo;

  const std::size_t count = albedo.size();
  fftw_complex* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * count));
  if (buf == nullptr) throw Error("wiener_post_filter: allocation failed");
  fftw_plan fwd, inv;
  {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fwd = fftw_plan_dft_2d(nx, ny, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    inv = fftw_plan_dft_2d(nx, ny, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < count; ++i) {
    buf[i][0] = albedo[i];
    buf[i][1] = 0.0;
  }
  fftw_execute(fwd);

  // Periodogram-based attenuation; DC passes so constants are preserved.
  double mean_power = 0.0;
  for (std::size_t i = 1; i < count; ++i)
    mean_power += buf[i][0] * buf[i][0] + buf[i][1] * buf[i][1];
  if (count > 1) mean_power /= static_cast<double>(count - 1);
  const double noise_power = noise_power_ratio * mean_power;
  for (std::size_t i = 1; i < count; ++i) {
    const double p = buf[i][0] * buf[i][0] + buf[i][1] * buf[i][1];
    const double h = p + noise_power > 0.0 ? p / (p + noise_power) : 0.0;
    buf[i][0] *= h;
    buf[i][1] *= h;
  }
  fftw_execute(inv);

  std::vector<double> out(count);
  const double scale = 1.0 / static_cast<double>(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = buf[i][0] * scale;
  {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
  }
  fftw_free(buf);
  return out;
}

}  // namespace qfnlos
