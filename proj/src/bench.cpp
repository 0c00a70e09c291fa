#include "qfnlos/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "qfnlos/errors.hpp"
#include "qfnlos/forward.hpp"
#include "qfnlos/pipeline.hpp"
#include "chirp_fft.hpp"

namespace qfnlos {

namespace {

constexpr double kBenchS1 = 0.05;
constexpr double kBenchDMax = 1.5;
constexpr double kBenchEventMean = 4.0;

/// Fixed physical scene; only the scan grid changes with N.
SceneSurfels bench_scene() {
  return SceneSurfels({{-0.35, -0.20, 0.60, 1.0},
                       {0.30, 0.25, 0.45, 0.8},
                       {0.05, -0.30, 0.90, 1.2}});
}

WallGrid bench_grid(int n) {
  const double pitch = 2.0 / n;  // 2 m x 2 m wall
  const double half = 0.5 * (n - 1) * pitch;
  return WallGrid(n, n, pitch, {-half, -half});
}

double bench_bin_length(const WallGrid& grid, int nt) {
  // Cover the farthest surfel's round trip with a small margin.
  double r_max = 0.0;
  const SceneSurfels scene = bench_scene();
  for (const Surfel& p : scene.surfels()) {
    const double dx = std::max(std::abs(grid.origin().x - p.x),
                               std::abs(grid.origin().x + (grid.nx() - 1) * grid.pitch() - p.x));
    const double dy = std::max(std::abs(grid.origin().y - p.y),
                               std::abs(grid.origin().y + (grid.ny() - 1) * grid.pitch() - p.y));
    r_max = std::max(r_max, std::sqrt(dx * dx + dy * dy + p.z * p.z));
  }
  return 2.0 * r_max * 1.05 / nt;
}

PipelineParams bench_params() {
  PipelineParams params;
  params.s1 = kBenchS1;
  params.d_max = kBenchDMax;
  return params;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

/// Summary of an audited in-place FDH run; keeps the computation observable.
struct FdhSummary {
  double peak_albedo = 0.0;
  double depth_at_peak = 0.0;
};

/// Acquisition-time half of the FDH regime: both field accumulators filled in
/// one pass over the synthetic event stream.
template <typename Real>
std::pair<std::vector<std::complex<Real>>, std::vector<std::complex<Real>>>
accumulate_fdh_fields(const WallGrid& grid, int falloff_k, double s1, double s2,
                      double event_mean, std::uint64_t seed, MemoryLedger* ledger) {
  EventAccumulator<Real> acc1(grid, falloff_k, s1, ledger, "phi_field_s1");
  EventAccumulator<Real> acc2(grid, falloff_k, s2, ledger, "phi_field_s2");
  for_each_synthetic_event(bench_scene(), grid, falloff_k, event_mean, seed,
                           [&](std::uint32_t i, std::uint32_t j, double tof) {
                             acc1.add(i, j, tof);
                             acc2.add(i, j, tof);
                           });
  return {acc1.take(), acc2.take()};
}

/// Post-acquisition half, in the memory-lean configuration the 5 MB
/// accounting refers to: separable in-place deconvolution of both fields,
/// then extraction overwriting the first field (albedo -> re, depth -> im).
template <typename Real>
FdhSummary fdh_reconstruct_inplace(std::vector<std::complex<Real>>& field1,
                                   std::vector<std::complex<Real>>& field2,
                                   const WallGrid& grid, double s1, double s2,
                                   MemoryLedger* ledger, double* reconstruct_seconds,
                                   const DepthOptions& depth_opts = {}) {
  Timer timer;
  DeconvOptions deconv;
  detail::separable_chirp_deconvolve_inplace<Real>(field1.data(), grid.nx(), grid.ny(),
                                                   grid.pitch(), s1, deconv, ledger);
  detail::separable_chirp_deconvolve_inplace<Real>(field2.data(), grid.nx(), grid.ny(),
                                                   grid.pitch(), s2, deconv, ledger);

  const std::size_t npx = grid.pixel_count();
  double amax = 0.0;
  for (std::size_t px = 0; px < npx; ++px)
    amax = std::max(amax, std::abs(std::complex<double>(field1[px])));
  const double cutoff = depth_opts.albedo_rel_threshold * amax;
  const double beta = unambiguous_beta(s1, s2);
  std::vector<std::uint8_t> mask(npx, 0);
  if (ledger != nullptr) ledger->note("valid_mask", npx, npx * sizeof(std::uint8_t));
  FdhSummary summary;
  std::size_t peak_px = 0;
  for (std::size_t px = 0; px < npx; ++px) {
    const std::complex<double> z1(field1[px]);
    const std::complex<double> z2(field2[px]);
    const double albedo = std::abs(z1);
    double depth = 0.0;
    if (albedo >= cutoff && albedo > 0.0) {
      mask[px] = 1;
      double wrapped = std::fmod(-std::arg(z1 * std::conj(z2)), 2.0 * kPi);
      if (wrapped < 0.0) wrapped += 2.0 * kPi;
      depth = std::sqrt(wrapped / beta);
    }
    field1[px] = std::complex<Real>(static_cast<Real>(albedo),
                                    static_cast<Real>(depth));
    if (albedo > summary.peak_albedo) {
      summary.peak_albedo = albedo;
      peak_px = px;
    }
  }
  summary.depth_at_peak = field1[peak_px].imag();
  if (reconstruct_seconds != nullptr) *reconstruct_seconds = timer.seconds();
  return summary;
}

template <typename Real>
FdhSummary run_fdh_pipeline(const WallGrid& grid, int falloff_k, double s1, double s2,
                            double event_mean, std::uint64_t seed,
                            MemoryLedger* ledger, double* reconstruct_seconds) {
  auto [field1, field2] =
      accumulate_fdh_fields<Real>(grid, falloff_k, s1, s2, event_mean, seed, ledger);
  return fdh_reconstruct_inplace<Real>(field1, field2, grid, s1, s2, ledger,
                                       reconstruct_seconds);
}

void check_power_of_two_ascending(const std::vector<int>& sizes) {
  int prev = 0;
  for (int n : sizes) {
    if (n < 2 || (n & (n - 1)) != 0)
      throw ParameterError("run_scaling: sizes must be powers of two, got " +
                           std::to_string(n));
    if (n <= prev) throw ParameterError("run_scaling: sizes must be ascending");
    prev = n;
  }
  if (sizes.empty()) throw ParameterError("run_scaling: no sizes given");
}

}  // namespace

std::string to_string(BenchMode mode) {
  switch (mode) {
    case BenchMode::kTraditional:
      return "traditional";
    case BenchMode::kLoading:
      return "loading";
    case BenchMode::kFdh:
      return "fdh";
  }
  return "?";
}

BenchMode bench_mode_from_string(const std::string& name) {
  if (name == "traditional") return BenchMode::kTraditional;
  if (name == "loading") return BenchMode::kLoading;
  if (name == "fdh") return BenchMode::kFdh;
  throw ParameterError("unknown mode '" + name +
                       "' (expected traditional, loading or fdh)");
}

double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ParameterError("fit_loglog_slope: need >= 2 points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw ParameterError("fit_loglog_slope: points must be positive");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

MemoryLedger audit_memory(BenchMode mode, int n, Dtype dtype) {
  if (n < 2) throw ParameterError("audit_memory: n must be >= 2");
  MemoryLedger ledger;
  const WallGrid grid = bench_grid(n);
  PipelineParams params = bench_params();

  if (mode == BenchMode::kFdh) {
    const auto [s1, s2] = resolve_s_pair(params, kBenchDMax);
    if (dtype == Dtype::kF32) {
      run_fdh_pipeline<float>(grid, 4, s1, s2, kBenchEventMean, 7, &ledger, nullptr);
    } else {
      run_fdh_pipeline<double>(grid, 4, s1, s2, kBenchEventMean, 7, &ledger, nullptr);
    }
    if (n == 512 && dtype == Dtype::kF32) {
      const std::size_t cap = std::size_t{5} << 20;
      if (ledger.total_bytes() >= cap) {
        std::ostringstream msg;
        msg << "audit_memory: fdh N=512 f32 total " << ledger.total_bytes()
            << " bytes exceeds the 5 MB cap; buffers:";
        for (const auto& e : ledger.entries())
          msg << " " << e.name << "=" << e.bytes;
        throw DataError(msg.str());
      }
    }
    return ledger;
  }

  const int nt = n;
  const double bin_length = bench_bin_length(grid, nt);
  const TransientHistogram hist =
      render_histogram(bench_scene(), grid, nt, bin_length, 4);
  if (mode == BenchMode::kTraditional) {
    reconstruct_traditional(hist, params, &ledger);
    return ledger;
  }

  HistogramSliceStream stream(hist);
  reconstruct_stream(stream, params, &ledger);
  const std::size_t cube_elements =
      grid.pixel_count() * static_cast<std::size_t>(nt);
  const std::size_t single_cap =
      grid.pixel_count() * (sizeof(std::complex<double>) + sizeof(double));
  std::ostringstream offending;
  for (const auto& e : ledger.entries()) {
    if (e.elements >= cube_elements || e.bytes > single_cap)
      offending << " " << e.name << "(elements=" << e.elements
                << ", bytes=" << e.bytes << ")";
  }
  if (!offending.str().empty())
    throw DataError("audit_memory: loading mode registered cube-sized buffers:" +
                    offending.str());
  return ledger;
}

ScalingReport run_scaling(const ScalingConfig& config) {
  check_power_of_two_ascending(config.sizes);
  if (config.repeats < 5)
    throw ParameterError("run_scaling: repeats must be >= 5");

  const int previous_threads = max_threads();
  set_max_threads(config.threads);
  ScalingReport report;
  report.threads = config.threads;

  struct Series {
    std::vector<double> n;
    std::vector<double> t;
  };
  std::map<std::pair<std::string, std::string>, Series> time_series;
  std::map<std::string, Series> mem_series;

  const SceneSurfels scene = bench_scene();
  PipelineParams params = bench_params();

  for (BenchMode mode : config.modes) {
    const std::string mode_name = to_string(mode);
    for (int n : config.sizes) {
      const WallGrid grid = bench_grid(n);
      std::map<std::string, std::vector<double>> stage_seconds;

      if (mode == BenchMode::kFdh) {
        const auto [s1, s2] = resolve_s_pair(params, kBenchDMax);
        const auto time_reps = [&](auto precision_tag) {
          using Real = decltype(precision_tag);
          const auto fields = accumulate_fdh_fields<Real>(grid, 4, s1, s2,
                                                          kBenchEventMean, 7, nullptr);
          for (int rep = -1; rep < config.repeats; ++rep) {
            auto field1 = fields.first;
            auto field2 = fields.second;
            double seconds = 0.0;
            fdh_reconstruct_inplace<Real>(field1, field2, grid, s1, s2, nullptr,
                                          &seconds);
            if (rep >= 0)  // rep -1 warms up plans and caches
              stage_seconds["reconstruct"].push_back(seconds);
          }
        };
        if (config.dtype == Dtype::kF32)
          time_reps(float{});
        else
          time_reps(double{});
      } else {
        const int nt = n;
        const std::size_t cube_bytes =
            grid.pixel_count() * static_cast<std::size_t>(nt) * sizeof(double);
        if (mode == BenchMode::kTraditional &&
            cube_bytes > config.traditional_byte_limit) {
          ScalingRow row;
          row.n = n;
          row.mode = mode;
          row.stage = "aggregate";
          row.skipped = true;
          row.note = "histogram would need " + std::to_string(cube_bytes) + " bytes";
          report.rows.push_back(row);
          continue;
        }
        const double bin_length = bench_bin_length(grid, nt);
        const TransientHistogram hist =
            render_histogram(scene, grid, nt, bin_length, 4);
        for (int rep = -1; rep < config.repeats; ++rep) {
          PipelineResult result;
          if (mode == BenchMode::kTraditional) {
            result = reconstruct_traditional(hist, params, nullptr);
          } else {
            HistogramSliceStream stream(hist);
            result = reconstruct_stream(stream, params, nullptr);
          }
          if (rep < 0) continue;
          std::map<std::string, double> combined;
          for (const StageTiming& t : result.timings) {
            std::string stage = t.stage;
            if (stage.rfind("aggregate", 0) == 0) stage = "aggregate";
            if (stage.rfind("deconvolve", 0) == 0) stage = "deconvolve";
            combined[stage] += t.seconds;
          }
          for (const auto& [stage, secs] : combined)
            stage_seconds[stage].push_back(secs);
        }
      }

      const MemoryLedger ledger = audit_memory(mode, n, config.dtype);
      const std::size_t ledger_bytes = ledger.total_bytes();
      mem_series[mode_name].n.push_back(n);
      mem_series[mode_name].t.push_back(static_cast<double>(ledger_bytes));

      for (const auto& [stage, seconds] : stage_seconds) {
        ScalingRow row;
        row.n = n;
        row.mode = mode;
        row.stage = stage;
        row.median_seconds = median(seconds);
        row.mean_seconds = mean(seconds);
        row.ledger_bytes = ledger_bytes;
        report.rows.push_back(row);
        auto& series = time_series[{mode_name, stage}];
        series.n.push_back(n);
        series.t.push_back(row.median_seconds);
      }
    }
  }

  for (const auto& [key, series] : time_series) {
    if (series.n.size() >= 2)
      report.time_slopes[key] = fit_loglog_slope(series.n, series.t);
  }
  for (const auto& [mode_name, series] : mem_series) {
    if (series.n.size() >= 2)
      report.memory_slopes[mode_name] = fit_loglog_slope(series.n, series.t);
  }

  set_max_threads(previous_threads);
  return report;
}

void write_scaling_csv(std::ostream& os, const ScalingReport& report) {
  os << "n,mode,stage,median_seconds,mean_seconds,ledger_bytes,skipped,note\n";
  for (const ScalingRow& row : report.rows) {
    os << row.n << "," << to_string(row.mode) << "," << row.stage << ","
       << row.median_seconds << "," << row.mean_seconds << "," << row.ledger_bytes
       << "," << (row.skipped ? 1 : 0) << "," << row.note << "\n";
  }
  for (const auto& [key, slope] : report.time_slopes)
    os << "slope," << key.first << "," << key.second << "," << slope << ",,,,\n";
  for (const auto& [mode_name, slope] : report.memory_slopes)
    os << "memory_slope," << mode_name << ",," << slope << ",,,,\n";
  os << "threads," << report.threads << ",,,,,,\n";
}

}  // namespace qfnlos
