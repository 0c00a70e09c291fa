#include "qfnlos/pipeline.hpp"

#include <chrono>
#include <cmath>

#include "qfnlos/errors.hpp"
#include "qfnlos/io.hpp"

namespace qfnlos {

namespace {

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& out) : out_(out) {}

  template <typename Fn>
  auto time(const std::string& stage, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record(stage, start);
    } else {
      auto result = fn();
      record(stage, start);
      return result;
    }
  }

 private:
  void record(const std::string& stage,
              std::chrono::steady_clock::time_point start) {
    const std::chrono::duration<double> dt =
        std::chrono::steady_clock::now() - start;
    out_.push_back({stage, dt.count()});
  }

  std::vector<StageTiming>& out_;
};

PipelineResult finish(AggregatedField phi1, AggregatedField phi2,
                      const PipelineParams& params, MemoryLedger* ledger,
                      std::vector<StageTiming> timings) {
  PipelineResult result;
  result.timings = std::move(timings);
  result.s1 = phi1.s();
  result.s2 = phi2.s();
  result.sampling = check_chirp_sampling(phi1.grid(), phi1.s());
  StageClock clock(result.timings);
  auto psi1 = clock.time("deconvolve_s1",
                         [&] { return deconvolve_fft(phi1, params.deconv, ledger); });
  auto psi2 = clock.time("deconvolve_s2",
                         [&] { return deconvolve_fft(phi2, params.deconv, ledger); });
  result.recon = clock.time("extract", [&] {
    return extract_reconstruction(psi1, psi2, params.depth, ledger);
  });
  return result;
}

}  // namespace

std::pair<double, double> resolve_s_pair(const PipelineParams& params,
                                         double d_max_hint) {
  if (!(params.s1 > 0.0))
    throw ParameterError("pipeline: s must be positive (set --s)");
  double ds;
  if (params.ds.has_value()) {
    ds = *params.ds;
    if (!(ds > 0.0)) throw ParameterError("pipeline: ds must be positive");
  } else {
    const double d_max = params.d_max.value_or(d_max_hint);
    if (!(d_max > 0.0))
      throw ParameterError(
          "pipeline: cannot derive ds; give --ds or --d-max (no histogram range "
          "to default from)");
    ds = default_ds(params.s1, d_max);
  }
  return {params.s1, params.s1 + ds};
}

PipelineResult reconstruct_fields(const AggregatedField& phi1,
                                  const AggregatedField& phi2,
                                  const PipelineParams& params,
                                  MemoryLedger* ledger) {
  if (!(phi1.grid() == phi2.grid()))
    throw DataError("pipeline: aggregated fields live on different grids");
  if (!(phi2.s() > phi1.s()))
    throw ParameterError("pipeline: requires s2 > s1");
  return finish(phi1, phi2, params, ledger, {});
}

PipelineResult reconstruct_traditional(const TransientHistogram& hist,
                                       const PipelineParams& params,
                                       MemoryLedger* ledger) {
  const auto [s1, s2] = resolve_s_pair(params, hist.max_path() / 2.0);
  if (ledger != nullptr)
    ledger->note("histogram", hist.data().size(),
                 hist.data().size() * sizeof(double));
  std::vector<StageTiming> timings;
  StageClock clock(timings);
  auto phi1 = clock.time("aggregate_s1", [&] { return aggregate_time(hist, s1, ledger); });
  auto phi2 = clock.time("aggregate_s2", [&] { return aggregate_time(hist, s2, ledger); });
  return finish(std::move(phi1), std::move(phi2), params, ledger, std::move(timings));
}

PipelineResult reconstruct_stream(BinSliceStream& slices,
                                  const PipelineParams& params,
                                  MemoryLedger* ledger) {
  const double max_path = slices.nt() * slices.bin_length();
  const auto [s1, s2] = resolve_s_pair(params, max_path / 2.0);
  std::vector<StageTiming> timings;
  StageClock clock(timings);
  const double s_values[2] = {s1, s2};
  auto fields = clock.time("aggregate_stream", [&] {
    return aggregate_stream_multi(slices, s_values, ledger);
  });
  return finish(std::move(fields[0]), std::move(fields[1]), params, ledger,
                std::move(timings));
}

namespace {

template <typename EventSource>
PipelineResult reconstruct_fdh(const WallGrid& grid, int falloff_k,
                               const EventSource& events, double max_tof,
                               const PipelineParams& params, MemoryLedger* ledger) {
  const auto [s1, s2] = resolve_s_pair(params, max_tof / 2.0);
  std::vector<StageTiming> timings;
  StageClock clock(timings);
  EventAccumulator<double> acc1(grid, falloff_k, s1, ledger, "phi_accumulator_0");
  EventAccumulator<double> acc2(grid, falloff_k, s2, ledger, "phi_accumulator_1");
  clock.time("aggregate_events", [&] {
    events([&](std::uint32_t i, std::uint32_t j, double tof) {
      acc1.add(i, j, tof);
      acc2.add(i, j, tof);
    });
  });
  AggregatedField phi1(grid, s1, falloff_k, acc1.take());
  AggregatedField phi2(grid, s2, falloff_k, acc2.take());
  return finish(std::move(phi1), std::move(phi2), params, ledger, std::move(timings));
}

}  // namespace

PipelineResult reconstruct_events(const PhotonEventList& events,
                                  const PipelineParams& params,
                                  MemoryLedger* ledger) {
  double max_tof = 0.0;
  if (!params.ds.has_value() && !params.d_max.has_value()) {
    for (const PhotonEvent& e : events.events())
      max_tof = std::max(max_tof, e.tof_path);
  }
  return reconstruct_fdh(
      events.grid(), events.falloff_k(),
      [&events](auto&& sink) {
        for (const PhotonEvent& e : events.events()) sink(e.pixel_i, e.pixel_j, e.tof_path);
      },
      max_tof, params, ledger);
}

PipelineResult reconstruct_event_file(const std::filesystem::path& path,
                                      const PipelineParams& params,
                                      MemoryLedger* ledger) {
  const EventFileInfo info = read_event_info(path);
  double max_tof = 0.0;
  if (!params.ds.has_value() && !params.d_max.has_value()) {
    // Extra pass only when the default d_max is actually needed.
    for_each_event_in_file(path, [&max_tof](std::uint32_t, std::uint32_t, double tof) {
      max_tof = std::max(max_tof, tof);
    });
  }
  return reconstruct_fdh(
      info.grid, info.falloff_k,
      [&path](auto&& sink) { for_each_event_in_file(path, sink); },
      max_tof, params, ledger);
}

}  // namespace qfnlos
