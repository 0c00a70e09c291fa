#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qfnlos/aggregate.hpp"
#include "qfnlos/deconvolve.hpp"
#include "qfnlos/extract.hpp"
#include "qfnlos/memory_ledger.hpp"
#include "qfnlos/types.hpp"

namespace qfnlos {

/// Shared reconstruction parameters for the three Table-1 regimes.
struct PipelineParams {
  double s1 = 0.0;
  std::optional<double> ds;     // s2 = s1 + ds; derived from d_max when unset
  std::optional<double> d_max;  // max scene depth; default max_path / 2
  DeconvOptions deconv;
  DepthOptions depth;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct PipelineResult {
  Reconstruction recon;
  double s1 = 0.0;
  double s2 = 0.0;
  ChirpSamplingReport sampling;
  std::vector<StageTiming> timings;
};

/// Resolves (s1, s2) from params; d_max_hint supplies the default d_max.
std::pair<double, double> resolve_s_pair(const PipelineParams& params,
                                         double d_max_hint);

/// Deconvolution + extraction from two already-aggregated fields.
PipelineResult reconstruct_fields(const AggregatedField& phi1,
                                  const AggregatedField& phi2,
                                  const PipelineParams& params,
                                  MemoryLedger* ledger = nullptr);

/// Traditional regime: the full histogram is in memory.
PipelineResult reconstruct_traditional(const TransientHistogram& hist,
                                       const PipelineParams& params,
                                       MemoryLedger* ledger = nullptr);

/// Loading regime: one pass over a bin-slice stream, both fields accumulated
/// together. Bitwise-identical to the traditional regime on equal data.
PipelineResult reconstruct_stream(BinSliceStream& slices,
                                  const PipelineParams& params,
                                  MemoryLedger* ledger = nullptr);

/// FDH regime from an in-memory event list.
PipelineResult reconstruct_events(const PhotonEventList& events,
                                  const PipelineParams& params,
                                  MemoryLedger* ledger = nullptr);

/// FDH regime from an event file, reading records in a single streaming pass.
PipelineResult reconstruct_event_file(const std::filesystem::path& path,
                                      const PipelineParams& params,
                                      MemoryLedger* ledger = nullptr);

}  // namespace qfnlos
