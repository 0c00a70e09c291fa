#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qfnlos/io.hpp"
#include "qfnlos/memory_ledger.hpp"

namespace qfnlos {

enum class BenchMode { kTraditional, kLoading, kFdh };

std::string to_string(BenchMode mode);
BenchMode bench_mode_from_string(const std::string& name);

struct ScalingRow {
  int n = 0;
  BenchMode mode = BenchMode::kFdh;
  std::string stage;
  double median_seconds = 0.0;
  double mean_seconds = 0.0;
  std::size_t ledger_bytes = 0;  // total audited bytes for (mode, n)
  bool skipped = false;
  std::string note;
};

struct ScalingConfig {
  std::vector<BenchMode> modes = {BenchMode::kFdh};
  std::vector<int> sizes = {128, 256, 512, 1024};  // ascending powers of two
  int repeats = 5;
  Dtype dtype = Dtype::kF64;
  int threads = 1;
  /// Traditional/loading histograms use nt = N time bins.
  std::size_t traditional_byte_limit = std::size_t{6} << 30;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  /// log-log slope of median stage time vs N, keyed by (mode, stage).
  std::map<std::pair<std::string, std::string>, double> time_slopes;
  /// log-log slope of audited ledger bytes vs N, keyed by mode.
  std::map<std::string, double> memory_slopes;
  int threads = 1;
};

/// Least-squares slope of log(y) vs log(x). Requires >= 2 positive points.
double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

/// Times the pipeline stages on synthetic inputs (a fixed scene scaled to the
/// grid) for each requested size and mode, audits memory per (mode, n), and
/// fits complexity slopes. The FDH "reconstruct" stage covers deconvolution +
/// extraction from the two aggregated fields, the part that runs after
/// acquisition-time accumulation.
ScalingReport run_scaling(const ScalingConfig& config);

void write_scaling_csv(std::ostream& os, const ScalingReport& report);

/// Runs the pipeline once for the given regime with ledger registration
/// active and checks the mode-specific caps (throws DataError listing the
/// offending buffers on violation):
///   fdh:     with Dtype::kF32 at N = 512, total < 5 * 2^20 bytes;
///   loading: no buffer of N^2 * nt elements or more.
MemoryLedger audit_memory(BenchMode mode, int n, Dtype dtype = Dtype::kF64);

}  // namespace qfnlos
