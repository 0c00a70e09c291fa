#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "qfnlos/grid.hpp"

namespace qfnlos {

/// Speed of light in vacuum, m/s.
inline constexpr double kSpeedOfLight = 299792458.0;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

double speed_of_light();

/// Time step (seconds) of a histogram whose bins span `bin_length` meters of
/// round-trip optical path.
inline double bin_time_step(double bin_length) {
  return bin_length / kSpeedOfLight;
}

/// Throws ParameterError unless k is 2 (retroreflective) or 4 (isotropic).
void validate_falloff_k(int k);

/// Raw 3-D transient measurement tau(x, t) on an N x N wall grid.
/// Time is stored as round-trip optical path: bin n covers
/// [n * bin_length, (n+1) * bin_length), with quadrature node at the center.
class TransientHistogram {
 public:
  TransientHistogram(WallGrid grid, int nt, double bin_length, int falloff_k);
  TransientHistogram(WallGrid grid, int nt, double bin_length, int falloff_k,
                     std::vector<double> data);

  const WallGrid& grid() const { return grid_; }
  int nt() const { return nt_; }
  double bin_length() const { return bin_length_; }
  int falloff_k() const { return falloff_k_; }

  double bin_center_path(int n) const { return (n + 0.5) * bin_length_; }
  /// Largest round-trip path covered by the histogram, nt * bin_length.
  double max_path() const { return nt_ * bin_length_; }

  double at(int i, int j, int n) const { return data_[flat(i, j, n)]; }
  std::span<const double> data() const { return data_; }
  /// Contiguous time series of one pixel.
  std::span<const double> pixel_series(int i, int j) const {
    return std::span<const double>(data_).subspan(flat(i, j, 0),
                                                  static_cast<std::size_t>(nt_));
  }

  std::size_t flat(int i, int j, int n) const {
    return (grid_.flat(i, j)) * static_cast<std::size_t>(nt_) +
           static_cast<std::size_t>(n);
  }

 private:
  WallGrid grid_;
  int nt_;
  double bin_length_;
  int falloff_k_;
  std::vector<double> data_;  // row-major [x][y][t]
};

/// Complex 2-D aggregated field phi(x; s).
class AggregatedField {
 public:
  AggregatedField(WallGrid grid, double s, int falloff_k,
                  std::vector<std::complex<double>> data);

  const WallGrid& grid() const { return grid_; }
  double s() const { return s_; }
  int falloff_k() const { return falloff_k_; }
  std::complex<double> at(int i, int j) const { return data_[grid_.flat(i, j)]; }
  std::span<const std::complex<double>> data() const { return data_; }

 private:
  WallGrid grid_;
  double s_;
  int falloff_k_;
  std::vector<std::complex<double>> data_;  // row-major [x][y]
};

/// Complex 2-D modulated albedo psi(x; s) = a(x) exp(-i d(x)^2 / (4 s^2)).
class ModulatedAlbedo {
 public:
  ModulatedAlbedo(WallGrid grid, double s, std::vector<std::complex<double>> data);

  const WallGrid& grid() const { return grid_; }
  double s() const { return s_; }
  std::complex<double> at(int i, int j) const { return data_[grid_.flat(i, j)]; }
  std::span<const std::complex<double>> data() const { return data_; }

 private:
  WallGrid grid_;
  double s_;
  std::vector<std::complex<double>> data_;
};

/// Albedo map, depth map and validity mask on the wall grid.
/// Depth is stored as 0 wherever the mask is false.
struct Reconstruction {
  WallGrid grid;
  std::vector<double> albedo;    // >= 0 everywhere
  std::vector<double> depth;     // meters, >= 0 where valid
  std::vector<std::uint8_t> valid;

  static Reconstruction checked(WallGrid grid, std::vector<double> albedo,
                                std::vector<double> depth,
                                std::vector<std::uint8_t> valid);
};

struct Surfel {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;  // > 0, hidden half-space
  double albedo = 0.0;
};

/// Hidden scene as weighted point scatterers.
class SceneSurfels {
 public:
  SceneSurfels() = default;
  explicit SceneSurfels(std::vector<Surfel> surfels);

  const std::vector<Surfel>& surfels() const { return surfels_; }
  bool empty() const { return surfels_.empty(); }
  std::size_t size() const { return surfels_.size(); }

 private:
  std::vector<Surfel> surfels_;
};

struct PhotonEvent {
  std::uint32_t pixel_i = 0;
  std::uint32_t pixel_j = 0;
  double tof_path = 0.0;  // round-trip optical path c * T_n, meters
};

/// Per-photon arrival records for the FDH accumulation path.
class PhotonEventList {
 public:
  PhotonEventList(WallGrid grid, int falloff_k, std::vector<PhotonEvent> events);

  const WallGrid& grid() const { return grid_; }
  int falloff_k() const { return falloff_k_; }
  const std::vector<PhotonEvent>& events() const { return events_; }

 private:
  WallGrid grid_;
  int falloff_k_;
  std::vector<PhotonEvent> events_;
};

struct ChirpSamplingReport {
  bool ok = true;
  double max_phase_step = 0.0;  // radians, per pixel step at the support edge
};

/// Largest per-pixel phase increment of the chirp kernel exp(i u^2 / (4 s^2))
/// over the matched (full-padding) kernel support, max_step = U_max * pitch /
/// (2 s^2) with U_max = (max(nx, ny) - 1) * pitch. ok iff max_step <= pi.
ChirpSamplingReport check_chirp_sampling(const WallGrid& grid, double s);

/// Number of worker threads used by per-pixel loops (>= 1). Results are
/// independent of this setting.
int max_threads();
void set_max_threads(int n);

}  // namespace qfnlos
