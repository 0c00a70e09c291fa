// qfnlos: confocal NLOS reconstruction via the quasi-Fresnel transform.
//
// Subcommands: render (forward simulation), reconstruct (one of the three
// regimes), sweep (reconstruct over a list of s values), bench (complexity /
// memory harness), transpose (histogram layout converter).

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "qfnlos/bench.hpp"
#include "qfnlos/errors.hpp"
#include "qfnlos/forward.hpp"
#include "qfnlos/io.hpp"
#include "qfnlos/pipeline.hpp"

namespace {

using namespace qfnlos;

struct GridFlags {
  int nx = 0;
  int ny = 0;
  double pitch = 0.0;
  double origin_x = 0.0;
  double origin_y = 0.0;

  WallGrid build() const { return WallGrid(nx, ny, pitch, {origin_x, origin_y}); }
};

void add_grid_flags(CLI::App* cmd, GridFlags& grid) {
  cmd->add_option("--nx", grid.nx, "grid pixels in x")->required();
  cmd->add_option("--ny", grid.ny, "grid pixels in y")->required();
  cmd->add_option("--pitch", grid.pitch, "pixel spacing in meters")->required();
  cmd->add_option("--origin-x", grid.origin_x, "x of pixel (0,0) in meters");
  cmd->add_option("--origin-y", grid.origin_y, "y of pixel (0,0) in meters");
}

struct ReconstructFlags {
  std::string input;
  std::string mode = "traditional";
  double s = 0.0;
  double ds = 0.0;
  double d_max = 0.0;
  std::string padding = "full";
  double albedo_threshold = 0.1;
  std::string estimator = "phase_ratio";
  std::string out_prefix = "recon";
  bool timing_csv = false;
};

void add_reconstruct_flags(CLI::App* cmd, ReconstructFlags& flags) {
  cmd->add_option("--input", flags.input, "histogram file (event file for fdh)")
      ->required();
  cmd->add_option("--mode", flags.mode, "table-1 regime")
      ->check(CLI::IsMember({"traditional", "loading", "fdh"}));
  cmd->add_option("--ds", flags.ds, "s spacing (derived from d-max when omitted)");
  cmd->add_option("--d-max", flags.d_max, "max scene depth for the ds rule, meters");
  cmd->add_option("--padding", flags.padding, "deconvolution boundary handling")
      ->check(CLI::IsMember({"full", "none"}));
  cmd->add_option("--albedo-threshold", flags.albedo_threshold,
                  "validity mask cutoff as fraction of max |psi|");
  cmd->add_option("--estimator", flags.estimator, "depth estimator")
      ->check(CLI::IsMember({"phase_ratio", "derivative"}));
  cmd->add_option("--out", flags.out_prefix, "output path prefix");
  cmd->add_flag("--timing-csv", flags.timing_csv,
                "print a stage,name,seconds CSV block");
}

PipelineParams pipeline_params(const ReconstructFlags& flags, double s) {
  PipelineParams params;
  params.s1 = s;
  if (flags.ds > 0.0) params.ds = flags.ds;
  if (flags.d_max > 0.0) params.d_max = flags.d_max;
  params.deconv.padding =
      flags.padding == "none" ? PaddingMode::kNone : PaddingMode::kFull;
  params.depth.albedo_rel_threshold = flags.albedo_threshold;
  params.depth.estimator = flags.estimator == "derivative"
                               ? DepthEstimator::kDerivative
                               : DepthEstimator::kPhaseRatio;
  return params;
}

PipelineResult run_reconstruct(const ReconstructFlags& flags, double s,
                               MemoryLedger* ledger) {
  const PipelineParams params = pipeline_params(flags, s);
  if (flags.mode == "traditional") {
    const TransientHistogram hist = read_histogram(flags.input);
    return reconstruct_traditional(hist, params, ledger);
  }
  if (flags.mode == "loading") {
    auto stream = open_bin_stream(flags.input);
    return reconstruct_stream(*stream, params, ledger);
  }
  return reconstruct_event_file(flags.input, params, ledger);
}

void write_outputs(const std::string& prefix, const Reconstruction& recon) {
  write_reconstruction(prefix + ".recon", recon);
  write_image_pgm(prefix + "_albedo.pgm", recon.albedo, recon.grid.nx(),
                  recon.grid.ny());
  write_image_pgm(prefix + "_depth.pgm", recon.depth, recon.grid.nx(),
                  recon.grid.ny());
}

void print_run_summary(const PipelineResult& result, const MemoryLedger& ledger,
                       bool timing_csv) {
  std::cout << "s1 = " << result.s1 << ", s2 = " << result.s2
            << " (ds = " << result.s2 - result.s1 << ")\n";
  std::cout << "chirp sampling: max phase step " << result.sampling.max_phase_step
            << " rad -> " << (result.sampling.ok ? "ok" : "ALIASED") << "\n";
  for (const StageTiming& t : result.timings)
    std::cout << "  " << t.stage << ": " << t.seconds << " s\n";
  std::cout << "memory ledger (" << ledger.total_bytes() << " bytes total):\n";
  for (const auto& e : ledger.entries())
    std::cout << "  " << e.name << ": " << e.bytes << " bytes (" << e.elements
              << " elements)\n";
  if (timing_csv) {
    std::cout << "stage,name,seconds\n";
    for (const StageTiming& t : result.timings)
      std::cout << "stage," << t.stage << "," << t.seconds << "\n";
  }
}

int cmd_render(const std::string& scene_path, const GridFlags& grid_flags, int nt,
               double bin_length, int k, const std::string& deposit,
               const std::string& noise, double exposure_scale, std::uint64_t seed,
               int layout, const std::string& dtype, const std::string& out,
               const std::string& events_out, double events_mean) {
  const SceneSurfels scene = read_scene_text(scene_path);
  const WallGrid grid = grid_flags.build();
  RenderOptions opts;
  opts.deposit = deposit == "nearest" ? DepositRule::kNearestBin
                                      : DepositRule::kLinearSplit;
  opts.noise = noise == "poisson" ? NoiseModel::kPoisson : NoiseModel::kNone;
  opts.exposure_scale = exposure_scale;
  opts.rng_seed = seed;
  ClipReport clip;
  const TransientHistogram hist =
      render_histogram(scene, grid, nt, bin_length, k, opts, &clip);
  write_histogram(out, hist,
                  layout == 1 ? HistogramLayout::kTXY : HistogramLayout::kXYT,
                  dtype == "f32" ? Dtype::kF32 : Dtype::kF64);
  std::cout << "wrote " << out << " (" << grid.nx() << "x" << grid.ny() << "x" << nt
            << ")\n";
  std::cout << "clip report: " << clip.clipped_deposits << " of "
            << clip.total_deposits << " deposits fell outside the time range\n";
  if (!events_out.empty()) {
    const PhotonEventList events = render_events(scene, grid, k, events_mean, seed);
    write_events(events_out, events);
    std::cout << "wrote " << events_out << " (" << events.events().size()
              << " events)\n";
  }
  return 0;
}

int cmd_reconstruct(const ReconstructFlags& flags) {
  MemoryLedger ledger;
  const PipelineResult result = run_reconstruct(flags, flags.s, &ledger);
  write_outputs(flags.out_prefix, result.recon);
  print_run_summary(result, ledger, flags.timing_csv);
  std::cout << "wrote " << flags.out_prefix << ".recon, _albedo.pgm, _depth.pgm\n";
  return 0;
}

int cmd_sweep(const ReconstructFlags& flags, const std::vector<double>& s_list,
              const std::string& csv_path) {
  std::ostringstream csv;
  csv << "s,status,peak_albedo,peak_sharpness,aliased,error\n";
  for (double s : s_list) {
    std::ostringstream tag;
    tag << flags.out_prefix << "_s" << s;
    try {
      MemoryLedger ledger;
      const PipelineResult result = run_reconstruct(flags, s, &ledger);
      write_outputs(tag.str(), result.recon);
      const auto& albedo = result.recon.albedo;
      const double peak = *std::max_element(albedo.begin(), albedo.end());
      const double total = std::accumulate(albedo.begin(), albedo.end(), 0.0);
      const double sharpness =
          total > 0.0 ? peak / (total / static_cast<double>(albedo.size())) : 0.0;
      csv << s << ",ok," << peak << "," << sharpness << ","
          << (result.sampling.ok ? 0 : 1) << ",\n";
    } catch (const Error& e) {
      csv << s << ",failed,,,," << '"' << e.what() << '"' << "\n";
    }
  }
  if (csv_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream os(csv_path, std::ios::trunc);
    os << csv.str();
    if (!os) throw FormatError("cannot write CSV: " + csv_path);
    std::cout << "wrote " << csv_path << "\n";
  }
  return 0;
}

int cmd_bench(const std::vector<std::string>& modes, const std::vector<int>& sizes,
              int repeats, const std::string& dtype, int threads,
              const std::string& csv_path) {
  ScalingConfig config;
  config.modes.clear();
  for (const auto& m : modes) config.modes.push_back(bench_mode_from_string(m));
  config.sizes = sizes;
  config.repeats = repeats;
  config.dtype = dtype == "f32" ? Dtype::kF32 : Dtype::kF64;
  config.threads = threads;
  const ScalingReport report = run_scaling(config);
  if (csv_path.empty()) {
    write_scaling_csv(std::cout, report);
  } else {
    std::ofstream os(csv_path, std::ios::trunc);
    write_scaling_csv(os, report);
    if (!os) throw FormatError("cannot write CSV: " + csv_path);
    std::cout << "wrote " << csv_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Confocal NLOS reconstruction via the quasi-Fresnel transform"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "worker thread cap for per-pixel loops");

  // render
  auto* render = app.add_subcommand("render", "simulate a transient histogram");
  render->set_config("--config");
  std::string scene_path, noise = "none", deposit = "linear", render_dtype = "f64";
  std::string hist_out = "histogram.qfh", events_out;
  GridFlags grid_flags;
  int nt = 0, k = 4, layout = 0;
  double bin_length = 0.0, exposure_scale = 0.0, events_mean = 0.0;
  std::uint64_t seed = 0;
  render->add_option("--scene", scene_path, "surfel list, one 'x y z albedo' per line")
      ->required();
  add_grid_flags(render, grid_flags);
  render->add_option("--nt", nt, "time bins")->required();
  render->add_option("--bin-length", bin_length, "meters of path per bin")->required();
  render->add_option("--k", k, "falloff exponent (2 or 4)");
  render->add_option("--deposit", deposit, "bin deposition rule")
      ->check(CLI::IsMember({"nearest", "linear"}));
  render->add_option("--noise", noise, "noise model")
      ->check(CLI::IsMember({"none", "poisson"}));
  render->add_option("--exposure-scale", exposure_scale, "poisson exposure scale");
  render->add_option("--seed", seed, "rng seed");
  render->add_option("--layout", layout, "0 = [x][y][t], 1 = [t][x][y] (streamable)")
      ->check(CLI::IsMember({0, 1}));
  render->add_option("--dtype", render_dtype, "payload precision")
      ->check(CLI::IsMember({"f32", "f64"}));
  render->add_option("--out", hist_out, "histogram output path");
  render->add_option("--events-out", events_out, "also write a photon event file");
  render->add_option("--events-mean", events_mean,
                     "mean photons for the strongest surfel-pixel pair");

  // reconstruct
  auto* rec = app.add_subcommand("reconstruct", "histogram/events -> albedo + depth");
  rec->set_config("--config");
  ReconstructFlags rec_flags;
  add_reconstruct_flags(rec, rec_flags);
  rec->add_option("--s", rec_flags.s, "quasi-Fresnel parameter s, meters")->required();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "reconstruct across several s values");
  sweep->set_config("--config");
  ReconstructFlags sweep_flags;
  std::vector<double> s_list;
  std::string sweep_csv;
  add_reconstruct_flags(sweep, sweep_flags);
  sweep->add_option("--s-list", s_list, "s values to try")->required()->expected(-1);
  sweep->add_option("--csv", sweep_csv, "summary CSV path (stdout when omitted)");

  // bench
  auto* bench = app.add_subcommand("bench", "complexity and memory harness");
  bench->set_config("--config");
  std::vector<std::string> bench_modes = {"fdh"};
  std::vector<int> bench_sizes = {128, 256, 512};
  int repeats = 5;
  std::string bench_dtype = "f64", bench_csv;
  bench->add_option("--modes", bench_modes, "regimes to benchmark")
      ->check(CLI::IsMember({"traditional", "loading", "fdh"}));
  bench->add_option("--sizes", bench_sizes, "grid sizes N (powers of two)");
  bench->add_option("--repeats", repeats, "runs per size (>= 5)");
  bench->add_option("--dtype", bench_dtype, "field precision")
      ->check(CLI::IsMember({"f32", "f64"}));
  bench->add_option("--csv", bench_csv, "report path (stdout when omitted)");

  // transpose
  auto* transpose = app.add_subcommand("transpose", "flip histogram file layout");
  std::string transpose_in, transpose_out;
  transpose->add_option("--input", transpose_in)->required();
  transpose->add_option("--output", transpose_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    set_max_threads(threads);
    if (render->parsed())
      return cmd_render(scene_path, grid_flags, nt, bin_length, k, deposit, noise,
                        exposure_scale, seed, layout, render_dtype, hist_out,
                        events_out, events_mean);
    if (rec->parsed()) return cmd_reconstruct(rec_flags);
    if (sweep->parsed()) return cmd_sweep(sweep_flags, s_list, sweep_csv);
    if (bench->parsed())
      return cmd_bench(bench_modes, bench_sizes, repeats, bench_dtype, threads,
                       bench_csv);
    if (transpose->parsed()) {
      transpose_histogram_file(transpose_in, transpose_out);
      std::cout << "wrote " << transpose_out << "\n";
      return 0;
    }
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
