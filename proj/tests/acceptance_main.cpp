// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria run independently; each prints its measured numbers.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "qfnlos/aggregate.hpp"
#include "qfnlos/bench.hpp"
#include "qfnlos/deconvolve.hpp"
#include "qfnlos/extract.hpp"
#include "qfnlos/forward.hpp"
#include "qfnlos/io.hpp"
#include "qfnlos/pipeline.hpp"
#include "qfnlos/rng.hpp"

using namespace qfnlos;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s%s%s\n", pass ? "PASS" : "FAIL", id,
              name.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void run_criterion(int id, const std::string& name,
                   const std::function<std::pair<bool, std::string>()>& fn) {
  try {
    const auto [pass, detail] = fn();
    report(id, name, pass, detail);
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

double rel_l2(std::span<const std::complex<double>> a,
              std::span<const std::complex<double>> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / den);
}

// ---------------------------------------------------------------- criterion 1
std::pair<bool, std::string> oracle_equivalence() {
  Rng rng(2024);
  std::vector<Surfel> surfels;
  for (int p = 0; p < 3; ++p) {
    surfels.push_back({(rng.next_double() - 0.5) * 0.24,
                       (rng.next_double() - 0.5) * 0.24,
                       0.4 + 0.5 * rng.next_double(), 0.5 + rng.next_double()});
  }
  const SceneSurfels scene(surfels);
  const int n = 64;
  const double pitch = 0.005;
  const WallGrid grid(n, n, pitch, {-0.5 * (n - 1) * pitch, -0.5 * (n - 1) * pitch});
  const int k = 4;
  const double s = 0.05;
  const auto analytic = render_phi_analytic(scene, grid, s, k);

  std::vector<double> errors;
  bool bound_ok = true;
  double worst_margin = 0.0;
  for (double bl : {0.004, 0.002, 0.001, 0.0005}) {
    // Cover the farthest round trip: max r < 1.1 m in this configuration.
    const int nt = static_cast<int>(std::ceil(2.2 / bl)) + 2;
    ClipReport clip;
    const auto hist = render_histogram(scene, grid, nt, bl, k, {}, &clip);
    if (clip.clipped_deposits != 0) return {false, "unexpected clipping"};
    const auto phi = aggregate_time(hist, s);

    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const auto idx = grid.flat(i, j);
        const std::complex<double> diff = phi.data()[idx] - analytic.data()[idx];
        num += std::norm(diff);
        den += std::norm(analytic.data()[idx]);
        // Per-pixel phase-quantization bound: sum_p a_p r_p bl / (4 s^2).
        const Vec2 x = grid.pixel_center(i, j);
        double bound = 0.0;
        for (const Surfel& p : scene.surfels()) {
          const double dx = x.x - p.x, dy = x.y - p.y;
          const double r = std::sqrt(dx * dx + dy * dy + p.z * p.z);
          bound += p.albedo * r * bl / (4.0 * s * s);
        }
        if (std::abs(diff) > bound) bound_ok = false;
        worst_margin = std::max(worst_margin, std::abs(diff) / bound);
      }
    }
    errors.push_back(std::sqrt(num / den));
  }

  bool ratios_ok = true;
  std::ostringstream detail;
  detail.precision(4);
  detail << "relL2 per bin_length halving:";
  for (std::size_t h = 1; h < errors.size(); ++h) {
    const double ratio = errors[h] / errors[h - 1];
    detail << " " << ratio;
    if (ratio < 0.4 || ratio > 0.6) ratios_ok = false;
  }
  detail << "; worst bound fraction " << worst_margin;
  return {bound_ok && ratios_ok, detail.str()};
}

// ---------------------------------------------------------------- criterion 2
std::pair<bool, std::string> fft_direct_equivalence() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const WallGrid grid(32, 32, 0.01);
    const double s = 0.02 + 0.005 * static_cast<double>(seed % 4);
    Rng rng(7000 + seed);
    std::vector<std::complex<double>> data(grid.pixel_count());
    for (auto& z : data)
      z = std::complex<double>(rng.next_double() - 0.5, rng.next_double() - 0.5);
    const AggregatedField phi(grid, s, 2, data);
    const auto fft = deconvolve_fft(phi);
    const auto direct = deconvolve_direct(phi);
    worst = std::max(worst, rel_l2(fft.data(), direct.data()));
  }
  std::ostringstream detail;
  detail << "worst relL2 " << worst << " over 20 seeds";
  return {worst <= 1e-10, detail.str()};
}

// ---------------------------------------------------------------- criterion 3
std::pair<bool, std::string> construct_then_invert() {
  const double s1 = 0.05;
  const double d_max = 1.2;
  const double s2 = s1 + default_ds(s1, d_max);
  if (!unambiguous_range_ok(d_max, s1, s2))
    return {false, "default ds violates the unambiguous range"};

  const WallGrid grid(10, 10, 0.01);
  Rng rng(31);
  std::vector<double> a(grid.pixel_count()), d(grid.pixel_count());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = 0.5 + rng.next_double();
    d[i] = (0.02 + 0.97 * rng.next_double()) * d_max;
  }
  std::vector<std::complex<double>> z1(grid.pixel_count()), z2(grid.pixel_count());
  for (std::size_t i = 0; i < a.size(); ++i) {
    z1[i] = std::polar(a[i], -d[i] * d[i] / (4.0 * s1 * s1));
    z2[i] = std::polar(a[i], -d[i] * d[i] / (4.0 * s2 * s2));
  }
  const ModulatedAlbedo psi1(grid, s1, z1), psi2(grid, s2, z2);
  DepthOptions opts;
  opts.albedo_rel_threshold = 0.05;
  const auto depth = extract_depth(psi1, psi2, opts);
  const auto albedo = extract_albedo(psi1);

  double worst_a = 0.0, worst_d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!depth.valid[i]) return {false, "pixel unexpectedly masked"};
    worst_a = std::max(worst_a, std::abs(albedo[i] - a[i]) / a[i]);
    worst_d = std::max(worst_d, std::abs(depth.depth[i] - d[i]) / d[i]);
  }
  std::ostringstream detail;
  detail << "100 pairs, worst rel err a " << worst_a << ", d " << worst_d;
  return {worst_a <= 1e-10 && worst_d <= 1e-10, detail.str()};
}

// ------------------------------------------------------- criteria 4/5 helpers
struct PipelineRun {
  Reconstruction recon;
  double s1, s2;
};

PipelineRun analytic_pipeline(const SceneSurfels& scene, const WallGrid& grid,
                              double s1, double d_max) {
  PipelineParams params;
  params.s1 = s1;
  params.d_max = d_max;
  const auto [rs1, rs2] = resolve_s_pair(params, d_max);
  const auto phi1 = render_phi_analytic(scene, grid, rs1, 4);
  const auto phi2 = render_phi_analytic(scene, grid, rs2, 4);
  auto result = reconstruct_fields(phi1, phi2, params);
  return {std::move(result.recon), rs1, rs2};
}

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(
      std::max_element(v.begin(), v.end()) - v.begin());
}

// ---------------------------------------------------------------- criterion 4
std::pair<bool, std::string> end_to_end_point() {
  const int n = 128;
  const double pitch = 0.01;
  const WallGrid grid(n, n, pitch, {-0.64, -0.64});
  const double s1 = 0.05;
  if (!check_chirp_sampling(grid, s1).ok) return {false, "pitch fails sampling"};

  std::ostringstream detail;
  detail.precision(4);
  bool ok = true;
  for (double z0 : {0.3, 0.5, 1.0}) {
    const SceneSurfels scene({{0.0, 0.0, z0, 1.0}});
    const auto run = analytic_pipeline(scene, grid, s1, 1.2);
    const std::size_t peak = argmax(run.recon.albedo);
    const int pi = static_cast<int>(peak) / n;
    const int pj = static_cast<int>(peak) % n;
    const double depth = run.recon.depth[peak];
    const double tol = std::max(pitch, 1e-3 * z0);
    detail << " z0=" << z0 << ": peak(" << pi << "," << pj << ") depth err "
           << std::abs(depth - z0) << ";";
    if (pi != 64 || pj != 64) ok = false;
    if (std::abs(depth - z0) > tol) ok = false;
    if (!run.recon.valid[peak]) ok = false;
  }
  return {ok, detail.str()};
}

// ---------------------------------------------------------------- criterion 5
std::pair<bool, std::string> multi_depth() {
  const int n = 128;
  const double pitch = 0.01;
  const WallGrid grid(n, n, pitch, {-0.64, -0.64});
  // Pixels (48,48) and (80,80): 45.3 pixels apart (>= N/4 = 32).
  const double xa = -0.64 + 48 * pitch, xb = -0.64 + 80 * pitch;
  const double za = 0.4, zb = 0.9;
  const SceneSurfels scene({{xa, xa, za, 1.0}, {xb, xb, zb, 1.0}});
  const auto run = analytic_pipeline(scene, grid, 0.05, 1.2);

  const std::size_t peak1 = argmax(run.recon.albedo);
  const int p1i = static_cast<int>(peak1) / n, p1j = static_cast<int>(peak1) % n;
  // Mask a neighborhood of the first peak, then find the second.
  std::vector<double> masked(run.recon.albedo);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (std::abs(i - p1i) <= 16 && std::abs(j - p1j) <= 16)
        masked[grid.flat(i, j)] = 0.0;
  const std::size_t peak2 = argmax(masked);
  const int p2i = static_cast<int>(peak2) / n, p2j = static_cast<int>(peak2) % n;

  const auto expect = [&](int pi, int pj, double z) {
    const std::size_t px = grid.flat(pi, pj);
    const double tol = std::max(pitch, 1e-3 * z);
    return std::abs(run.recon.depth[px] - z) <= tol && run.recon.valid[px];
  };
  const bool found_a = (p1i == 48 && p1j == 48) || (p2i == 48 && p2j == 48);
  const bool found_b = (p1i == 80 && p1j == 80) || (p2i == 80 && p2j == 80);
  const bool ok = found_a && found_b && expect(48, 48, za) && expect(80, 80, zb);
  std::ostringstream detail;
  detail.precision(4);
  detail << "peaks (" << p1i << "," << p1j << ") (" << p2i << "," << p2j
         << "); depth errs "
         << std::abs(run.recon.depth[grid.flat(48, 48)] - za) << ", "
         << std::abs(run.recon.depth[grid.flat(80, 80)] - zb);
  return {ok, detail.str()};
}

// ---------------------------------------------------------------- criterion 6
std::pair<bool, std::string> regime_equivalence() {
  const int n = 32, nt = 256;
  const double pitch = 0.01;
  const WallGrid grid(n, n, pitch, {-0.155, -0.155});
  const SceneSurfels scene(
      {{0.0, 0.0, 0.5, 1.0}, {0.08, -0.06, 0.75, 0.7}, {-0.1, 0.1, 0.6, 1.2}});
  const auto hist = render_histogram(scene, grid, nt, 0.008, 4);

  const fs::path path =
      fs::temp_directory_path() / ("qfnlos_acc6_" + std::to_string(::getpid()));
  write_histogram(path, hist, HistogramLayout::kTXY);

  PipelineParams params;
  params.s1 = 0.05;
  params.d_max = 1.2;
  const auto trad = reconstruct_traditional(hist, params);
  MemoryLedger ledger;
  auto stream = open_bin_stream(path);
  const auto loaded = reconstruct_stream(*stream, params, &ledger);
  fs::remove(path);

  bool identical = trad.recon.valid == loaded.recon.valid;
  for (std::size_t i = 0; identical && i < trad.recon.albedo.size(); ++i) {
    if (trad.recon.albedo[i] != loaded.recon.albedo[i]) identical = false;
    if (trad.recon.depth[i] != loaded.recon.depth[i]) identical = false;
  }
  const std::size_t cube = grid.pixel_count() * static_cast<std::size_t>(nt);
  const bool no_cube = ledger.max_entry_elements() < cube;
  std::ostringstream detail;
  detail << (identical ? "bit-identical" : "MISMATCH") << "; largest buffer "
         << ledger.max_entry_elements() << " elements vs cube " << cube;
  return {identical && no_cube, detail.str()};
}

// ---------------------------------------------------------------- criterion 7
std::pair<bool, std::string> fdh_consistency() {
  // Deterministic events at bin centers: the accumulator must equal the
  // literal per-event sum, bitwise, in event order.
  const WallGrid grid(2, 2, 0.1);
  const int k = 4;
  const double s = 0.06;
  const double bl = 0.01;
  std::vector<PhotonEvent> events;
  for (int n = 40; n < 200; n += 7)
    events.push_back({static_cast<std::uint32_t>(n % 2),
                      static_cast<std::uint32_t>((n / 2) % 2),
                      (n + 0.5) * bl});
  const PhotonEventList list(grid, k, events);
  const auto phi = aggregate_events(list, s);

  std::vector<std::complex<double>> literal(grid.pixel_count(), {0.0, 0.0});
  for (const PhotonEvent& e : events) {
    const double r = e.tof_path * 0.5;
    const double amp = (r * r) * (r * r);  // r^k, k = 4
    const double phase = -(r * r) / (4.0 * s * s);
    auto& acc = literal[grid.flat(static_cast<int>(e.pixel_i),
                                  static_cast<int>(e.pixel_j))];
    acc = std::complex<double>(acc.real() + amp * std::cos(phase),
                               acc.imag() + amp * std::sin(phase));
  }
  bool exact = true;
  for (std::size_t i = 0; i < literal.size(); ++i) {
    if (phi.data()[i].real() != literal[i].real()) exact = false;
    if (phi.data()[i].imag() != literal[i].imag()) exact = false;
  }

  // Poisson events: sample mean vs analytic field up to one fitted complex
  // constant, 10 seeds, >= 1e4 events per occupied pixel.
  const WallGrid pgrid(4, 4, 0.05);
  const SceneSurfels scene({{0.08, 0.05, 1.0, 1.0}, {0.02, 0.12, 1.1, 0.6}});
  const double mean = 4.0e4;
  const double ps = 0.3;
  const auto analytic = render_phi_analytic(scene, pgrid, ps, k);
  std::vector<std::complex<double>> sum(pgrid.pixel_count(), {0.0, 0.0});
  for (int seed = 0; seed < 10; ++seed) {
    const auto ev = render_events(scene, pgrid, k, mean, 5000 + seed);
    std::vector<int> counts(pgrid.pixel_count(), 0);
    for (const auto& e : ev.events())
      counts[pgrid.flat(static_cast<int>(e.pixel_i), static_cast<int>(e.pixel_j))]++;
    for (int c : counts)
      if (c < 10000) return {false, "fewer than 1e4 events at a pixel"};
    const auto f = aggregate_events(ev, ps);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += f.data()[i];
  }
  for (auto& z : sum) z /= 10.0;
  std::complex<double> num(0.0, 0.0);
  double den = 0.0;
  for (std::size_t i = 0; i < sum.size(); ++i) {
    num += std::conj(analytic.data()[i]) * sum[i];
    den += std::norm(analytic.data()[i]);
  }
  const std::complex<double> alpha = num / den;
  std::vector<std::complex<double>> fitted(sum.size());
  for (std::size_t i = 0; i < sum.size(); ++i) fitted[i] = alpha * analytic.data()[i];
  const double err = rel_l2(sum, fitted);

  std::ostringstream detail;
  detail << (exact ? "deterministic sum exact" : "deterministic sum MISMATCH")
         << "; poisson relL2 " << err;
  return {exact && err <= 0.05, detail.str()};
}

// ---------------------------------------------------------------- criterion 8
std::pair<bool, std::string> memory_claim() {
  const auto ledger = audit_memory(BenchMode::kFdh, 512, Dtype::kF32);
  const std::size_t per_array = std::size_t{512} * 512 * 8;  // the paper's figure
  const bool arrays_exact = ledger.bytes_of("phi_field_s1") == per_array &&
                            ledger.bytes_of("phi_field_s2") == per_array;
  const bool under_cap = ledger.total_bytes() < (std::size_t{5} << 20);
  std::ostringstream detail;
  detail << "per-array " << ledger.bytes_of("phi_field_s1") << " B (= 512*512*8 = "
         << per_array << " B = 2 MB), total " << ledger.total_bytes() << " B < "
         << (std::size_t{5} << 20) << " B";
  // Also print the f64 figure the design decision mentions.
  const auto f64 = audit_memory(BenchMode::kFdh, 512, Dtype::kF64);
  detail << "; f64 total " << f64.total_bytes() << " B";
  return {arrays_exact && under_cap, detail.str()};
}

// ---------------------------------------------------------------- criterion 9
std::pair<bool, std::string> scaling_shape() {
  ScalingConfig config;
  config.modes = {BenchMode::kFdh};
  config.sizes = {128, 256, 512, 1024};
  config.repeats = 5;
  const auto report = run_scaling(config);
  const auto key = std::make_pair(std::string("fdh"), std::string("reconstruct"));
  if (report.time_slopes.count(key) == 0) return {false, "missing slope"};
  const double time_slope = report.time_slopes.at(key);
  const double mem_slope = report.memory_slopes.at("fdh");
  std::ostringstream detail;
  detail.precision(4);
  detail << "time slope " << time_slope << " (<= 2.4), ledger slope " << mem_slope
         << " (2.0 +- 0.1)";
  return {time_slope <= 2.4 && std::abs(mem_slope - 2.0) <= 0.1, detail.str()};
}

// --------------------------------------------------------------- criterion 10
std::pair<bool, std::string> out_of_scope_note() {
  return {true,
          "dataset reconstructions, depth MAE figures, absolute runtimes and "
          "cross-method comparisons need unavailable datasets, baselines and "
          "hardware; criteria 1-9 stand in with property/oracle checks"};
}

}  // namespace

int main() {
  run_criterion(1, "aggregation matches the analytic transform", oracle_equivalence);
  run_criterion(2, "FFT deconvolution matches the direct oracle",
                fft_direct_equivalence);
  run_criterion(3, "construct-then-invert extraction", construct_then_invert);
  run_criterion(4, "end-to-end point scatterer", end_to_end_point);
  run_criterion(5, "multi-depth single-run recovery", multi_depth);
  run_criterion(6, "traditional and loading regimes agree bitwise",
                regime_equivalence);
  run_criterion(7, "FDH accumulation consistency", fdh_consistency);
  run_criterion(8, "FDH memory stays under 5 MB at N = 512 (f32)", memory_claim);
  run_criterion(9, "FDH reconstruction complexity shape", scaling_shape);
  run_criterion(10, "paper-scale results out of desk scope", out_of_scope_note);

  if (g_failures != 0) std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
