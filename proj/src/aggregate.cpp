#include "qfnlos/aggregate.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "qfnlos/errors.hpp"
#include "parallel.hpp"

namespace qfnlos {

namespace {

inline double half_path_pow(double r, int k) {
  const double r2 = r * r;
  return k == 2 ? r2 : r2 * r2;
}

/// The one accumulation step shared by the batch and streaming paths; both
/// must round identically so the regimes stay bitwise equal.
inline void accumulate_bin(std::complex<double>& acc, const std::complex<double>& w,
                           double v) {
  acc = std::complex<double>(acc.real() + w.real() * v,
                             acc.imag() + w.imag() * v);
}

}  // namespace

BinSliceStream::BinSliceStream(WallGrid grid, int nt, double bin_length,
                               int falloff_k)
    : grid_(grid), nt_(nt), bin_length_(bin_length), falloff_k_(falloff_k) {
  if (nt < 1) throw ParameterError("BinSliceStream: nt must be >= 1");
  if (!(bin_length > 0.0))
    throw ParameterError("BinSliceStream: bin_length must be positive");
  validate_falloff_k(falloff_k);
}

HistogramSliceStream::HistogramSliceStream(const TransientHistogram& hist)
    : BinSliceStream(hist.grid(), hist.nt(), hist.bin_length(), hist.falloff_k()),
      hist_(&hist) {}

bool HistogramSliceStream::next(std::span<double> slice) {
  if (n_ >= nt()) return false;
  if (slice.size() != grid().pixel_count())
    throw StreamError("HistogramSliceStream: slice buffer has " +
                      std::to_string(slice.size()) + " elements, expected " +
                      std::to_string(grid().pixel_count()));
  const int nx = grid().nx();
  const int ny = grid().ny();
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) slice[grid().flat(i, j)] = hist_->at(i, j, n_);
  ++n_;
  return true;
}

CallbackSliceStream::CallbackSliceStream(WallGrid grid, int nt, double bin_length,
                                         int falloff_k, SliceFn fn)
    : BinSliceStream(grid, nt, bin_length, falloff_k), fn_(std::move(fn)) {}

bool CallbackSliceStream::next(std::span<double> slice) {
  if (n_ >= nt()) return false;
  if (slice.size() != grid().pixel_count())
    throw StreamError("CallbackSliceStream: slice buffer has " +
                      std::to_string(slice.size()) + " elements, expected " +
                      std::to_string(grid().pixel_count()));
  fn_(n_, slice);
  ++n_;
  return true;
}

std::vector<std::complex<double>> aggregation_weights(int nt, double bin_length,
                                                      int falloff_k, double s) {
  if (!(s > 0.0)) throw ParameterError("aggregation_weights: s must be positive");
  if (nt < 1) throw ParameterError("aggregation_weights: nt must be >= 1");
  if (!(bin_length > 0.0))
    throw ParameterError("aggregation_weights: bin_length must be positive");
  validate_falloff_k(falloff_k);

  const double inv16s2 = 1.0 / (16.0 * s * s);
  const double half_bin = bin_length * 0.5;
  std::vector<std::complex<double>> w(static_cast<std::size_t>(nt));
  for (int n = 0; n < nt; ++n) {
    const double rho = (n + 0.5) * bin_length;
    const double amp = half_path_pow(rho * 0.5, falloff_k) * half_bin;
    const double phase = -(rho * rho) * inv16s2;
    w[n] = std::complex<double>(amp * std::cos(phase), amp * std::sin(phase));
  }
  return w;
}

AggregatedField aggregate_time(const TransientHistogram& hist, double s,
                               MemoryLedger* ledger) {
  const auto w =
      aggregation_weights(hist.nt(), hist.bin_length(), hist.falloff_k(), s);
  const std::size_t npx = hist.grid().pixel_count();
  const std::size_t nt = static_cast<std::size_t>(hist.nt());
  std::vector<std::complex<double>> field(npx, std::complex<double>(0.0, 0.0));
  if (ledger != nullptr) {
    ledger->note("phi_field", npx, npx * sizeof(std::complex<double>));
    ledger->note("time_weights", nt, nt * sizeof(std::complex<double>));
  }
  const double* data = hist.data().data();
  detail::parallel_for(npx, [&](std::size_t begin, std::size_t end) {
    for (std::size_t px = begin; px < end; ++px) {
      const double* series = data + px * nt;
      std::complex<double> acc(0.0, 0.0);
      for (std::size_t n = 0; n < nt; ++n) accumulate_bin(acc, w[n], series[n]);
      field[px] = acc;
    }
  });
  return AggregatedField(hist.grid(), s, hist.falloff_k(), std::move(field));
}

std::vector<AggregatedField> aggregate_stream_multi(BinSliceStream& slices,
                                                    std::span<const double> s_values,
                                                    MemoryLedger* ledger) {
  if (s_values.empty())
    throw ParameterError("aggregate_stream_multi: need at least one s value");
  const std::size_t npx = slices.grid().pixel_count();
  const std::size_t nt = static_cast<std::size_t>(slices.nt());
  const std::size_t ns = s_values.size();

  std::vector<std::vector<std::complex<double>>> weights;
  weights.reserve(ns);
  for (double s : s_values)
    weights.push_back(aggregation_weights(slices.nt(), slices.bin_length(),
                                          slices.falloff_k(), s));

  std::vector<std::vector<std::complex<double>>> fields(
      ns, std::vector<std::complex<double>>(npx, std::complex<double>(0.0, 0.0)));
  std::vector<double> slice(npx);
  if (ledger != nullptr) {
    for (std::size_t f = 0; f < ns; ++f)
      ledger->note("phi_accumulator_" + std::to_string(f), npx,
                   npx * sizeof(std::complex<double>));
    ledger->note("bin_slice", npx, npx * sizeof(double));
    ledger->note("time_weights", ns * nt,
                 ns * nt * sizeof(std::complex<double>));
  }

  for (std::size_t n = 0; n < nt; ++n) {
    if (!slices.next(slice))
      throw StreamError("aggregate_stream: expected " + std::to_string(nt) +
                        " slices, stream ended after " + std::to_string(n));
    for (std::size_t f = 0; f < ns; ++f) {
      const std::complex<double> wn = weights[f][n];
      auto& field = fields[f];
      detail::parallel_for(npx, [&](std::size_t begin, std::size_t end) {
        for (std::size_t px = begin; px < end; ++px)
          accumulate_bin(field[px], wn, slice[px]);
      });
    }
  }

  std::vector<AggregatedField> out;
  out.reserve(ns);
  for (std::size_t f = 0; f < ns; ++f)
    out.emplace_back(slices.grid(), s_values[f], slices.falloff_k(),
                     std::move(fields[f]));
  return out;
}

AggregatedField aggregate_stream(BinSliceStream& slices, double s,
                                 MemoryLedger* ledger) {
  const double s_values[1] = {s};
  auto fields = aggregate_stream_multi(slices, s_values, ledger);
  return std::move(fields.front());
}

template <typename Real>
EventAccumulator<Real>::EventAccumulator(WallGrid grid, int falloff_k, double s,
                                         MemoryLedger* ledger,
                                         const std::string& ledger_name)
    : grid_(grid),
      falloff_k_(falloff_k),
      s_(s),
      field_(grid.pixel_count(), std::complex<Real>(0, 0)) {
  if (!(s > 0.0)) throw ParameterError("EventAccumulator: s must be positive");
  validate_falloff_k(falloff_k);
  if (ledger != nullptr)
    ledger->note(ledger_name, field_.size(), field_.size() * sizeof(std::complex<Real>));
}

template <typename Real>
void EventAccumulator<Real>::add(std::uint32_t pixel_i, std::uint32_t pixel_j,
                                 double tof_path) {
  if (!grid_.contains(static_cast<int>(pixel_i), static_cast<int>(pixel_j)))
    throw DataError("aggregate_events: event " + std::to_string(count_) +
                    " pixel (" + std::to_string(pixel_i) + ", " +
                    std::to_string(pixel_j) + ") outside grid");
  const double r = tof_path * 0.5;
  const double amp = (falloff_k_ == 2) ? r * r : (r * r) * (r * r);
  const double phase = -(r * r) / (4.0 * s_ * s_);
  auto& acc = field_[grid_.flat(static_cast<int>(pixel_i),
                                static_cast<int>(pixel_j))];
  acc = std::complex<Real>(
      acc.real() + static_cast<Real>(amp * std::cos(phase)),
      acc.imag() + static_cast<Real>(amp * std::sin(phase)));
  ++count_;
}

template class EventAccumulator<float>;
template class EventAccumulator<double>;

AggregatedField aggregate_events(const PhotonEventList& events, double s,
                                 MemoryLedger* ledger) {
  EventAccumulator<double> acc(events.grid(), events.falloff_k(), s, ledger,
                               "phi_field");
  for (const PhotonEvent& e : events.events()) acc.add(e.pixel_i, e.pixel_j, e.tof_path);
  return AggregatedField(events.grid(), s, events.falloff_k(), acc.take());
}

}  // namespace qfnlos
