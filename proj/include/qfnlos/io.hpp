#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>

#include "qfnlos/aggregate.hpp"
#include "qfnlos/types.hpp"

namespace qfnlos {

inline constexpr std::uint32_t kFormatVersion = 1;

enum class Dtype : std::uint32_t { kF32 = 0, kF64 = 1 };

std::size_t dtype_size(Dtype dtype);

enum class HistogramLayout : std::uint32_t {
  kXYT = 0,  // row-major [x][y][t]; matches the in-memory layout
  kTXY = 1,  // time-major [t][x][y]; the streamable variant
};

void write_histogram(const std::filesystem::path& path, const TransientHistogram& hist,
                     HistogramLayout layout = HistogramLayout::kXYT,
                     Dtype dtype = Dtype::kF64);
TransientHistogram read_histogram(const std::filesystem::path& path);

/// Header peek without reading the payload.
struct HistogramFileInfo {
  WallGrid grid;
  int nt;
  double bin_length;
  int falloff_k;
  Dtype dtype;
  HistogramLayout layout;
};
HistogramFileInfo read_histogram_info(const std::filesystem::path& path);

/// Opens a time-major (layout 1) histogram file as a slice stream holding one
/// slice in memory. Layout-0 files raise FormatError ("not streamable").
std::unique_ptr<BinSliceStream> open_bin_stream(const std::filesystem::path& path);

/// Rewrites an [x][y][t] histogram file as [t][x][y] (or the reverse).
void transpose_histogram_file(const std::filesystem::path& in,
                              const std::filesystem::path& out);

void write_events(const std::filesystem::path& path, const PhotonEventList& events);
PhotonEventList read_events(const std::filesystem::path& path);

struct EventFileInfo {
  WallGrid grid;
  int falloff_k;
  std::uint64_t event_count;
};
EventFileInfo read_event_info(const std::filesystem::path& path);
/// Streams records in file order with O(1) memory per event.
void for_each_event_in_file(
    const std::filesystem::path& path,
    const std::function<void(std::uint32_t, std::uint32_t, double)>& sink);

void write_field(const std::filesystem::path& path, const AggregatedField& field);
void write_field(const std::filesystem::path& path, const ModulatedAlbedo& psi,
                 int falloff_k);
AggregatedField read_field(const std::filesystem::path& path);

void write_reconstruction(const std::filesystem::path& path, const Reconstruction& rec);
Reconstruction read_reconstruction(const std::filesystem::path& path);

enum class PgmNormalization { kMax, kPercentile };

/// 16-bit binary PGM (P5, big-endian samples). Values are scaled into
/// [0, 65535] by the chosen normalization; percentile mode clips above the
/// nearest-rank percentile value.
void write_image_pgm(const std::filesystem::path& path, std::span<const double> map,
                     int nx, int ny,
                     PgmNormalization norm = PgmNormalization::kPercentile,
                     double percentile = 99.0);

/// Text scene file: one "x y z albedo" per line; '#' comments and blank lines
/// allowed. Parse errors name the line number.
SceneSurfels read_scene_text(const std::filesystem::path& path);
void write_scene_text(const std::filesystem::path& path, const SceneSurfels& scene);

}  // namespace qfnlos
