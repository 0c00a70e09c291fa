#include "qfnlos/types.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "qfnlos/errors.hpp"

namespace qfnlos {

namespace {

std::atomic<int> g_max_threads{1};

void validate_finite_nonneg(std::span<const double> data, const char* what) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double v = data[i];
    if (!std::isfinite(v))
      throw DataError(std::string(what) + ": non-finite entry at flat index " +
                      std::to_string(i));
    if (v < 0.0)
      throw DataError(std::string(what) + ": negative entry at flat index " +
                      std::to_string(i));
  }
}

void validate_finite(std::span<const std::complex<double>> data, const char* what) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i].real()) || !std::isfinite(data[i].imag()))
      throw DataError(std::string(what) + ": non-finite entry at flat index " +
                      std::to_string(i));
  }
}

}  // namespace

double speed_of_light() { return kSpeedOfLight; }

void validate_falloff_k(int k) {
  if (k != 2 && k != 4)
    throw ParameterError("falloff exponent k must be 2 or 4, got " +
                         std::to_string(k));
}

int max_threads() { return g_max_threads.load(std::memory_order_relaxed); }

void set_max_threads(int n) {
  g_max_threads.store(std::max(1, n), std::memory_order_relaxed);
}

TransientHistogram::TransientHistogram(WallGrid grid, int nt, double bin_length,
                                       int falloff_k)
    : TransientHistogram(grid, nt, bin_length, falloff_k,
                         std::vector<double>(grid.pixel_count() *
                                             static_cast<std::size_t>(nt))) {}

TransientHistogram::TransientHistogram(WallGrid grid, int nt, double bin_length,
                                       int falloff_k, std::vector<double> data)
    : grid_(grid),
      nt_(nt),
      bin_length_(bin_length),
      falloff_k_(falloff_k),
      data_(std::move(data)) {
  if (nt < 1) throw ParameterError("TransientHistogram: nt must be >= 1");
  if (!(bin_length > 0.0) || !std::isfinite(bin_length))
    throw ParameterError("TransientHistogram: bin_length must be positive");
  validate_falloff_k(falloff_k);
  if (data_.size() != grid.pixel_count() * static_cast<std::size_t>(nt))
    throw DataError("TransientHistogram: data size does not match grid * nt");
  validate_finite_nonneg(data_, "TransientHistogram");
}

AggregatedField::AggregatedField(WallGrid grid, double s, int falloff_k,
                                 std::vector<std::complex<double>> data)
    : grid_(grid), s_(s), falloff_k_(falloff_k), data_(std::move(data)) {
  if (!(s > 0.0) || !std::isfinite(s))
    throw ParameterError("AggregatedField: s must be positive");
  validate_falloff_k(falloff_k);
  if (data_.size() != grid.pixel_count())
    throw DataError("AggregatedField: data size does not match grid");
  validate_finite(data_, "AggregatedField");
}

ModulatedAlbedo::ModulatedAlbedo(WallGrid grid, double s,
                                 std::vector<std::complex<double>> data)
    : grid_(grid), s_(s), data_(std::move(data)) {
  if (!(s > 0.0) || !std::isfinite(s))
    throw ParameterError("ModulatedAlbedo: s must be positive");
  if (data_.size() != grid.pixel_count())
    throw DataError("ModulatedAlbedo: data size does not match grid");
  validate_finite(data_, "ModulatedAlbedo");
}

Reconstruction Reconstruction::checked(WallGrid grid, std::vector<double> albedo,
                                       std::vector<double> depth,
                                       std::vector<std::uint8_t> valid) {
  const std::size_t n = grid.pixel_count();
  if (albedo.size() != n || depth.size() != n || valid.size() != n)
    throw DataError("Reconstruction: map sizes do not match grid");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(albedo[i]) || albedo[i] < 0.0)
      throw DataError("Reconstruction: invalid albedo at flat index " +
                      std::to_string(i));
    if (valid[i]) {
      if (!std::isfinite(depth[i]) || depth[i] < 0.0)
        throw DataError("Reconstruction: invalid depth at flat index " +
                        std::to_string(i));
    } else if (depth[i] != 0.0) {
      throw DataError("Reconstruction: depth must be 0 where invalid, index " +
                      std::to_string(i));
    }
  }
  return Reconstruction{grid, std::move(albedo), std::move(depth), std::move(valid)};
}

SceneSurfels::SceneSurfels(std::vector<Surfel> surfels) : surfels_(std::move(surfels)) {
  for (std::size_t i = 0; i < surfels_.size(); ++i) {
    const Surfel& p = surfels_[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) ||
        !std::isfinite(p.albedo))
      throw DataError("SceneSurfels: non-finite surfel " + std::to_string(i));
    if (!(p.z > 0.0))
      throw DataError("SceneSurfels: surfel " + std::to_string(i) +
                      " must have z > 0 (hidden half-space)");
    if (p.albedo < 0.0)
      throw DataError("SceneSurfels: surfel " + std::to_string(i) +
                      " has negative albedo");
  }
}

PhotonEventList::PhotonEventList(WallGrid grid, int falloff_k,
                                 std::vector<PhotonEvent> events)
    : grid_(grid), falloff_k_(falloff_k), events_(std::move(events)) {
  validate_falloff_k(falloff_k);
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const PhotonEvent& e = events_[i];
    if (!grid.contains(static_cast<int>(e.pixel_i), static_cast<int>(e.pixel_j)))
      throw DataError("PhotonEventList: event " + std::to_string(i) +
                      " pixel (" + std::to_string(e.pixel_i) + ", " +
                      std::to_string(e.pixel_j) + ") outside grid");
    if (!(e.tof_path > 0.0) || !std::isfinite(e.tof_path))
      throw DataError("PhotonEventList: event " + std::to_string(i) +
                      " has nonpositive tof_path");
  }
}

ChirpSamplingReport check_chirp_sampling(const WallGrid& grid, double s) {
  if (!(s > 0.0)) throw ParameterError("check_chirp_sampling: s must be positive");
  const int max_half = std::max(grid.nx(), grid.ny()) - 1;
  const double u_max = max_half * grid.pitch();
  const double max_step = u_max * grid.pitch() / (2.0 * s * s);
  return {max_step <= kPi, max_step};
}

}  // namespace qfnlos
