#include "chirp_fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <string>
#include <vector>

#include "qfnlos/errors.hpp"
#include "qfnlos/types.hpp"

namespace qfnlos::detail {

std::mutex& fftw_planner_mutex() {
  static std::mutex mu;
  return mu;
}

namespace {

template <typename Real>
struct FftwApi;

template <>
struct FftwApi<double> {
  using complex_t = fftw_complex;
  using plan_t = fftw_plan;
  static void* malloc(std::size_t bytes) { return fftw_malloc(bytes); }
  static void free(void* p) { fftw_free(p); }
  static plan_t plan(int n, complex_t* buf, int sign) {
    return fftw_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE);
  }
  static void execute(plan_t p) { fftw_execute(p); }
  static void destroy(plan_t p) { fftw_destroy_plan(p); }
};

template <>
struct FftwApi<float> {
  using complex_t = fftwf_complex;
  using plan_t = fftwf_plan;
  static void* malloc(std::size_t bytes) { return fftwf_malloc(bytes); }
  static void free(void* p) { fftwf_free(p); }
  static plan_t plan(int n, complex_t* buf, int sign) {
    return fftwf_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE);
  }
  static void execute(plan_t p) { fftwf_execute(p); }
  static void destroy(plan_t p) { fftwf_destroy_plan(p); }
};

/// One 1-D chirp convolution lane of length `axis.padded_len`. The kernel
/// spectrum carries the 1/L inverse-transform normalization.
template <typename Real>
class ChirpLane {
  using Api = FftwApi<Real>;

 public:
  ChirpLane(const AxisPlan& axis, double pitch, double s, MemoryLedger* ledger,
            const std::string& name)
      : n_(axis.field_len), half_(axis.half_extent), len_(axis.padded_len) {
    buf_ = static_cast<std::complex<Real>*>(
        Api::malloc(sizeof(std::complex<Real>) * static_cast<std::size_t>(len_)));
    khat_ = static_cast<std::complex<Real>*>(
        Api::malloc(sizeof(std::complex<Real>) * static_cast<std::size_t>(len_)));
    if (buf_ == nullptr || khat_ == nullptr) throw Error("chirp_fft: allocation failed");
    if (ledger != nullptr) {
      ledger->note(name + "_kernel_fft", static_cast<std::size_t>(len_),
                   static_cast<std::size_t>(len_) * sizeof(std::complex<Real>));
      ledger->note(name + "_line_buffer", static_cast<std::size_t>(len_),
                   static_cast<std::size_t>(len_) * sizeof(std::complex<Real>));
    }
    {
      std::lock_guard<std::mutex> lock(fftw_planner_mutex());
      fwd_ = Api::plan(len_, reinterpret_cast<typename Api::complex_t*>(buf_), -1);
      inv_ = Api::plan(len_, reinterpret_cast<typename Api::complex_t*>(buf_), +1);
    }

    // Circular embedding of the centered chirp; wrapped taps add up when the
    // padding mode makes them collide (kNone with wide kernels).
    const auto taps = chirp_kernel_1d(half_, pitch, s);
    for (int u = 0; u < len_; ++u) buf_[u] = std::complex<Real>(0, 0);
    for (int m = -half_; m <= half_; ++m) {
      const int u = ((m % len_) + len_) % len_;
      const std::complex<double> tap = taps[static_cast<std::size_t>(m + half_)];
      buf_[u] += std::complex<Real>(static_cast<Real>(tap.real()),
                                    static_cast<Real>(tap.imag()));
    }
    Api::execute(fwd_);
    const Real inv_len = Real(1) / static_cast<Real>(len_);
    for (int u = 0; u < len_; ++u) khat_[u] = buf_[u] * inv_len;
  }

  ~ChirpLane() {
    {
      std::lock_guard<std::mutex> lock(fftw_planner_mutex());
      Api::destroy(fwd_);
      Api::destroy(inv_);
    }
    Api::free(buf_);
    Api::free(khat_);
  }

  ChirpLane(const ChirpLane&) = delete;
  ChirpLane& operator=(const ChirpLane&) = delete;

  void convolve(std::complex<Real>* line, std::size_t stride) {
    for (int u = 0; u < n_; ++u) buf_[u] = line[static_cast<std::size_t>(u) * stride];
    for (int u = n_; u < len_; ++u) buf_[u] = std::complex<Real>(0, 0);
    Api::execute(fwd_);
    for (int u = 0; u < len_; ++u) buf_[u] *= khat_[u];
    Api::execute(inv_);
    for (int u = 0; u < n_; ++u) line[static_cast<std::size_t>(u) * stride] = buf_[u];
  }

 private:
  int n_;
  int half_;
  int len_;
  std::complex<Real>* buf_ = nullptr;
  std::complex<Real>* khat_ = nullptr;
  typename Api::plan_t fwd_{};
  typename Api::plan_t inv_{};
};

}  // namespace

int next_fast_len(int n) {
  if (n <= 1) return 1;
  for (int candidate = n;; ++candidate) {
    int m = candidate;
    for (int f : {2, 3, 5}) {
      while (m % f == 0) m /= f;
    }
    if (m == 1) return candidate;
  }
}

AxisPlan resolve_axis(int field_len, int kernel_taps, PaddingMode padding) {
  if (field_len < 1) throw ParameterError("deconvolve: empty field axis");
  AxisPlan axis;
  axis.field_len = field_len;
  if (kernel_taps == 0) {
    // Matched extent: every offset that occurs on the grid.
    axis.half_extent = field_len - 1;
    axis.padded_len = padding == PaddingMode::kFull
                          ? next_fast_len(2 * field_len - 1)
                          : field_len;
  } else {
    if (kernel_taps < 1 || kernel_taps % 2 == 0)
      throw ParameterError("deconvolve: explicit kernel extent must be odd, got " +
                           std::to_string(kernel_taps));
    axis.half_extent = (kernel_taps - 1) / 2;
    axis.padded_len = padding == PaddingMode::kFull
                          ? next_fast_len(field_len + kernel_taps - 1)
                          : field_len;
  }
  return axis;
}

template <typename Real>
void separable_chirp_deconvolve_inplace(std::complex<Real>* data, int nx, int ny,
                                        double pitch, double s,
                                        const DeconvOptions& opts,
                                        MemoryLedger* ledger) {
  const AxisPlan ax = resolve_axis(nx, opts.kernel_taps_x, opts.padding);
  const AxisPlan ay = resolve_axis(ny, opts.kernel_taps_y, opts.padding);

  {
    ChirpLane<Real> lane_y(ay, pitch, s, ledger, "chirp_y");
    for (int i = 0; i < nx; ++i)
      lane_y.convolve(data + static_cast<std::size_t>(i) * ny, 1);
  }
  {
    ChirpLane<Real> lane_x(ax, pitch, s, ledger, "chirp_x");
    for (int j = 0; j < ny; ++j)
      lane_x.convolve(data + j, static_cast<std::size_t>(ny));
  }

  const double s2 = s * s;
  const double scale_d = pitch * pitch / (16.0 * kPi * kPi * s2 * s2);
  const Real scale = static_cast<Real>(scale_d);
  const std::size_t count = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  for (std::size_t idx = 0; idx < count; ++idx) data[idx] *= scale;
}

template void separable_chirp_deconvolve_inplace<float>(std::complex<float>*, int,
                                                        int, double, double,
                                                        const DeconvOptions&,
                                                        MemoryLedger*);
template void separable_chirp_deconvolve_inplace<double>(std::complex<double>*, int,
                                                         int, double, double,
                                                         const DeconvOptions&,
                                                         MemoryLedger*);

}  // namespace qfnlos::detail
