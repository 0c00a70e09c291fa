#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "qfnlos/memory_ledger.hpp"
#include "qfnlos/types.hpp"

namespace qfnlos {

/// Pull-based source of time-bin slices tau[.][.][n], n = 0 .. nt-1 in order.
/// Lets the aggregation run while holding one slice plus the accumulator.
class BinSliceStream {
 public:
  virtual ~BinSliceStream() = default;

  const WallGrid& grid() const { return grid_; }
  int nt() const { return nt_; }
  double bin_length() const { return bin_length_; }
  int falloff_k() const { return falloff_k_; }

  /// Fills `slice` (nx * ny, row-major) with the next bin. Returns false once
  /// all nt slices have been produced. Throws StreamError on contract breaks.
  virtual bool next(std::span<double> slice) = 0;

 protected:
  BinSliceStream(WallGrid grid, int nt, double bin_length, int falloff_k);

 private:
  WallGrid grid_;
  int nt_;
  double bin_length_;
  int falloff_k_;
};

/// In-memory adapter over a materialized histogram.
class HistogramSliceStream final : public BinSliceStream {
 public:
  explicit HistogramSliceStream(const TransientHistogram& hist);
  bool next(std::span<double> slice) override;

 private:
  const TransientHistogram* hist_;
  int n_ = 0;
};

/// Slices computed on demand; used by the benchmark harness so the Loading
/// regime can be driven without a histogram file or cube in memory.
class CallbackSliceStream final : public BinSliceStream {
 public:
  using SliceFn = std::function<void(int n, std::span<double> slice)>;
  CallbackSliceStream(WallGrid grid, int nt, double bin_length, int falloff_k,
                      SliceFn fn);
  bool next(std::span<double> slice) override;

 private:
  SliceFn fn_;
  int n_ = 0;
};

/// Time-integration weights: w_n = (rho_n / 2)^k * exp(-i rho_n^2 / (16 s^2))
/// * (bin_length / 2), with rho_n = (n + 0.5) * bin_length.
std::vector<std::complex<double>> aggregation_weights(int nt, double bin_length,
                                                      int falloff_k, double s);

/// phi[i][j] = sum_n w_n * tau[i][j][n], ascending n.
AggregatedField aggregate_time(const TransientHistogram& hist, double s,
                               MemoryLedger* ledger = nullptr);

/// Same arithmetic as aggregate_time, one slice in memory at a time;
/// bitwise-identical result.
AggregatedField aggregate_stream(BinSliceStream& slices, double s,
                                 MemoryLedger* ledger = nullptr);

/// One pass over the stream producing one field per s value; each field is
/// bitwise-identical to the corresponding aggregate_time result.
std::vector<AggregatedField> aggregate_stream_multi(BinSliceStream& slices,
                                                    std::span<const double> s_values,
                                                    MemoryLedger* ledger = nullptr);

/// FDH accumulation: per event with round-trip path p, adds
/// (p/2)^k * exp(-i (p/2)^2 / (4 s^2)) into its pixel.
AggregatedField aggregate_events(const PhotonEventList& events, double s,
                                 MemoryLedger* ledger = nullptr);

/// Streaming FDH accumulator, O(1) per event on top of the field buffer.
/// Real = float matches the storage the 5 MB accounting assumes.
template <typename Real>
class EventAccumulator {
 public:
  EventAccumulator(WallGrid grid, int falloff_k, double s,
                   MemoryLedger* ledger = nullptr,
                   const std::string& ledger_name = "phi_accumulator");

  /// Throws DataError (with the running event index) on out-of-grid pixels.
  void add(std::uint32_t pixel_i, std::uint32_t pixel_j, double tof_path);

  const WallGrid& grid() const { return grid_; }
  double s() const { return s_; }
  std::uint64_t event_count() const { return count_; }
  std::span<const std::complex<Real>> data() const { return field_; }
  std::vector<std::complex<Real>> take() { return std::move(field_); }

 private:
  WallGrid grid_;
  int falloff_k_;
  double s_;
  std::uint64_t count_ = 0;
  std::vector<std::complex<Real>> field_;
};

extern template class EventAccumulator<float>;
extern template class EventAccumulator<double>;

}  // namespace qfnlos
