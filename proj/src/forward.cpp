#include "qfnlos/forward.hpp"

#include <atomic>
#include <cmath>

#include "qfnlos/errors.hpp"
#include "qfnlos/rng.hpp"
#include "parallel.hpp"

namespace qfnlos {

namespace {

inline double falloff_pow(double r, int k) {
  const double r2 = r * r;
  return k == 2 ? r2 : r2 * r2;
}

inline double surfel_distance(const Surfel& p, Vec2 x) {
  const double dx = x.x - p.x;
  const double dy = x.y - p.y;
  return std::sqrt(dx * dx + dy * dy + p.z * p.z);
}

}  // namespace

TransientHistogram render_histogram(const SceneSurfels& scene, const WallGrid& grid,
                                    int nt, double bin_length, int falloff_k,
                                    const RenderOptions& opts, ClipReport* clip) {
  if (nt < 1) throw ParameterError("render_histogram: nt must be >= 1");
  if (!(bin_length > 0.0))
    throw ParameterError("render_histogram: bin_length must be positive");
  validate_falloff_k(falloff_k);
  if (opts.noise == NoiseModel::kPoisson && !(opts.exposure_scale >= 0.0))
    throw ParameterError("render_histogram: exposure_scale must be >= 0");

  const std::size_t npx = grid.pixel_count();
  const std::size_t ntime = static_cast<std::size_t>(nt);
  std::vector<double> data(npx * ntime, 0.0);
  std::atomic<std::uint64_t> clipped{0};
  std::atomic<std::uint64_t> total{0};

  detail::parallel_for(npx, [&](std::size_t begin, std::size_t end) {
    std::uint64_t local_clipped = 0;
    std::uint64_t local_total = 0;
    for (std::size_t px = begin; px < end; ++px) {
      const int i = static_cast<int>(px / static_cast<std::size_t>(grid.ny()));
      const int j = static_cast<int>(px % static_cast<std::size_t>(grid.ny()));
      const Vec2 x = grid.pixel_center(i, j);
      double* series = data.data() + px * ntime;
      for (const Surfel& p : scene.surfels()) {
        const double r = surfel_distance(p, x);
        const double mass = p.albedo * (2.0 / bin_length) / falloff_pow(r, falloff_k);
        const double u = (2.0 * r) / bin_length;
        const auto n0 = static_cast<long long>(std::floor(u));
        ++local_total;
        if (opts.deposit == DepositRule::kNearestBin) {
          if (n0 >= 0 && n0 < nt) {
            series[n0] += mass;
          } else {
            ++local_clipped;
          }
        } else {
          const double f = u - static_cast<double>(n0);
          bool any_clipped = false;
          if (n0 >= 0 && n0 < nt) {
            series[n0] += (1.0 - f) * mass;
          } else if ((1.0 - f) > 0.0) {
            any_clipped = true;
          }
          if (f > 0.0) {
            if (n0 + 1 >= 0 && n0 + 1 < nt) {
              series[n0 + 1] += f * mass;
            } else {
              any_clipped = true;
            }
          }
          if (any_clipped) ++local_clipped;
        }
      }
      if (opts.noise == NoiseModel::kPoisson) {
        Rng rng(pixel_stream_seed(opts.rng_seed, i, j));
        if (opts.exposure_scale == 0.0) {
          for (std::size_t n = 0; n < ntime; ++n) series[n] = 0.0;
        } else {
          for (std::size_t n = 0; n < ntime; ++n) {
            const double lambda = opts.exposure_scale * series[n];
            series[n] = static_cast<double>(poisson_sample(rng, lambda)) /
                        opts.exposure_scale;
          }
        }
      }
    }
    clipped.fetch_add(local_clipped, std::memory_order_relaxed);
    total.fetch_add(local_total, std::memory_order_relaxed);
  });

  if (clip != nullptr) {
    clip->clipped_deposits = clipped.load();
    clip->total_deposits = total.load();
  }
  return TransientHistogram(grid, nt, bin_length, falloff_k, std::move(data));
}

AggregatedField render_phi_analytic(const SceneSurfels& scene, const WallGrid& grid,
                                    double s, int falloff_k) {
  if (!(s > 0.0)) throw ParameterError("render_phi_analytic: s must be positive");
  validate_falloff_k(falloff_k);
  const double inv4s2 = 1.0 / (4.0 * s * s);
  std::vector<std::complex<double>> field(grid.pixel_count());
  detail::parallel_for(grid.pixel_count(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t px = begin; px < end; ++px) {
      const int i = static_cast<int>(px / static_cast<std::size_t>(grid.ny()));
      const int j = static_cast<int>(px % static_cast<std::size_t>(grid.ny()));
      const Vec2 x = grid.pixel_center(i, j);
      std::complex<double> acc(0.0, 0.0);
      for (const Surfel& p : scene.surfels()) {
        const double dx = x.x - p.x;
        const double dy = x.y - p.y;
        const double dist2 = dx * dx + dy * dy + p.z * p.z;
        const double phase = -dist2 * inv4s2;
        acc += std::complex<double>(p.albedo * std::cos(phase),
                                    p.albedo * std::sin(phase));
      }
      field[px] = acc;
    }
  });
  return AggregatedField(grid, s, falloff_k, std::move(field));
}

void for_each_synthetic_event(
    const SceneSurfels& scene, const WallGrid& grid, int falloff_k,
    double mean_photons_per_surfel_pixel, std::uint64_t rng_seed,
    const std::function<void(std::uint32_t, std::uint32_t, double)>& sink) {
  validate_falloff_k(falloff_k);
  if (!(mean_photons_per_surfel_pixel >= 0.0))
    throw ParameterError("render_events: mean must be >= 0");
  if (scene.empty() || mean_photons_per_surfel_pixel == 0.0) return;

  // Normalizer: the strongest (surfel, pixel) pair gets exactly `mean`.
  double z = 0.0;
  for (int i = 0; i < grid.nx(); ++i) {
    for (int j = 0; j < grid.ny(); ++j) {
      const Vec2 x = grid.pixel_center(i, j);
      for (const Surfel& p : scene.surfels()) {
        const double r = surfel_distance(p, x);
        z = std::max(z, p.albedo / falloff_pow(r, falloff_k));
      }
    }
  }
  if (z <= 0.0) return;

  for (int i = 0; i < grid.nx(); ++i) {
    for (int j = 0; j < grid.ny(); ++j) {
      const Vec2 x = grid.pixel_center(i, j);
      Rng rng(pixel_stream_seed(rng_seed, i, j));
      for (const Surfel& p : scene.surfels()) {
        const double r = surfel_distance(p, x);
        const double lambda = mean_photons_per_surfel_pixel * p.albedo /
                              falloff_pow(r, falloff_k) / z;
        const std::uint64_t count = poisson_sample(rng, lambda);
        const double tof = 2.0 * r;
        for (std::uint64_t c = 0; c < count; ++c) {
          sink(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), tof);
        }
      }
    }
  }
}

PhotonEventList render_events(const SceneSurfels& scene, const WallGrid& grid,
                              int falloff_k, double mean_photons_per_surfel_pixel,
                              std::uint64_t rng_seed) {
  std::vector<PhotonEvent> events;
  for_each_synthetic_event(scene, grid, falloff_k, mean_photons_per_surfel_pixel,
                           rng_seed,
                           [&events](std::uint32_t i, std::uint32_t j, double tof) {
                             events.push_back({i, j, tof});
                           });
  return PhotonEventList(grid, falloff_k, std::move(events));
}

}  // namespace qfnlos
