#include "qfnlos/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "qfnlos/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "on-disk formats are little-endian; big-endian hosts need byte swaps");

namespace qfnlos {

namespace {

constexpr char kHistogramMagic[8] = {'Q', 'F', 'N', 'L', 'O', 'S', 'H', '\0'};
constexpr char kEventMagic[8] = {'Q', 'F', 'N', 'L', 'O', 'S', 'E', '\0'};
constexpr char kFieldMagic[8] = {'Q', 'F', 'N', 'L', 'O', 'S', 'F', '\0'};
constexpr char kReconMagic[8] = {'Q', 'F', 'N', 'L', 'O', 'S', 'R', '\0'};

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path)
      : path_(path), os_(path, std::ios::binary | std::ios::trunc) {
    if (!os_) throw FormatError("cannot open for writing: " + path.string());
  }
  template <typename T>
  void put(T v) {
    os_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void put_bytes(const void* p, std::size_t n) {
    os_.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void finish() {
    os_.flush();
    if (!os_) throw FormatError("write failed: " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream os_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path)
      : path_(path), is_(path, std::ios::binary) {
    if (!is_) throw FormatError("cannot open for reading: " + path.string());
    is_.seekg(0, std::ios::end);
    size_ = static_cast<std::uint64_t>(is_.tellg());
    is_.seekg(0, std::ios::beg);
  }

  std::uint64_t file_size() const { return size_; }
  std::uint64_t offset() const { return offset_; }
  const std::filesystem::path& path() const { return path_; }

  template <typename T>
  T get(const char* what) {
    T v{};
    read_bytes(&v, sizeof(T), what);
    return v;
  }
  void read_bytes(void* p, std::size_t n, const char* what) {
    is_.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is_.gcount()) != n)
      throw FormatError(path_.string() + ": truncated while reading " + what +
                        " at offset " + std::to_string(offset_) + " (wanted " +
                        std::to_string(n) + " bytes, file has " +
                        std::to_string(size_ - offset_) + " left)");
    offset_ += n;
  }

  void expect_magic(const char (&magic)[8], const char* format_name) {
    char got[8];
    read_bytes(got, 8, "magic");
    if (std::memcmp(got, magic, 8) != 0)
      throw FormatError(path_.string() + ": bad magic at offset 0, not a " +
                        format_name + " file");
  }

  void expect_version() {
    const auto v = get<std::uint32_t>("version");
    if (v != kFormatVersion)
      throw FormatError(path_.string() + ": unsupported version " +
                        std::to_string(v) + " at offset 8 (expected " +
                        std::to_string(kFormatVersion) + ")");
  }

  /// Declared payload must match the actual remaining byte count exactly.
  void expect_payload_bytes(std::uint64_t expected, const char* what) {
    const std::uint64_t actual = size_ - offset_;
    if (actual != expected)
      throw FormatError(path_.string() + ": " + what + " payload mismatch at offset " +
                        std::to_string(offset_) + ": header implies " +
                        std::to_string(expected) + " bytes, file has " +
                        std::to_string(actual));
  }

 private:
  std::filesystem::path path_;
  std::ifstream is_;
  std::uint64_t size_ = 0;
  std::uint64_t offset_ = 0;
};

Dtype dtype_from_u32(Reader& r, std::uint32_t v) {
  if (v > 1)
    throw FormatError(r.path().string() + ": unknown dtype code " + std::to_string(v));
  return static_cast<Dtype>(v);
}

HistogramLayout layout_from_u32(Reader& r, std::uint32_t v) {
  if (v > 1)
    throw FormatError(r.path().string() + ": unknown layout code " + std::to_string(v));
  return static_cast<HistogramLayout>(v);
}

void write_histogram_header(Writer& w, const TransientHistogram& hist,
                            HistogramLayout layout, Dtype dtype) {
  w.put_bytes(kHistogramMagic, 8);
  w.put<std::uint32_t>(kFormatVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(hist.grid().nx()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(hist.grid().ny()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(hist.nt()));
  w.put<double>(hist.grid().pitch());
  w.put<double>(hist.grid().origin().x);
  w.put<double>(hist.grid().origin().y);
  w.put<double>(hist.bin_length());
  w.put<std::uint32_t>(static_cast<std::uint32_t>(hist.falloff_k()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(dtype));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(layout));
}

struct HistogramHeader {
  HistogramFileInfo info;
  std::uint64_t values = 0;
};

HistogramHeader read_histogram_header(Reader& r) {
  r.expect_magic(kHistogramMagic, "histogram");
  r.expect_version();
  const auto nx = r.get<std::uint32_t>("nx");
  const auto ny = r.get<std::uint32_t>("ny");
  const auto nt = r.get<std::uint32_t>("nt");
  const auto pitch = r.get<double>("pitch");
  const auto ox = r.get<double>("origin_x");
  const auto oy = r.get<double>("origin_y");
  const auto bin_length = r.get<double>("bin_length");
  const auto k = r.get<std::uint32_t>("falloff_k");
  const auto dtype = dtype_from_u32(r, r.get<std::uint32_t>("dtype"));
  const auto layout = layout_from_u32(r, r.get<std::uint32_t>("layout"));
  HistogramHeader h{
      {WallGrid(static_cast<int>(nx), static_cast<int>(ny), pitch, {ox, oy}),
       static_cast<int>(nt), bin_length, static_cast<int>(k), dtype, layout},
      std::uint64_t{nx} * ny * nt};
  r.expect_payload_bytes(h.values * dtype_size(dtype), "histogram");
  return h;
}

template <typename Store>
void write_values(Writer& w, std::span<const double> values) {
  if constexpr (std::is_same_v<Store, double>) {
    w.put_bytes(values.data(), values.size() * sizeof(double));
  } else {
    std::vector<Store> tmp(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
      tmp[i] = static_cast<Store>(values[i]);
    w.put_bytes(tmp.data(), tmp.size() * sizeof(Store));
  }
}

std::vector<double> read_values(Reader& r, std::uint64_t count, Dtype dtype,
                                const char* what) {
  std::vector<double> out(count);
  if (dtype == Dtype::kF64) {
    r.read_bytes(out.data(), count * sizeof(double), what);
  } else {
    std::vector<float> tmp(count);
    r.read_bytes(tmp.data(), count * sizeof(float), what);
    for (std::uint64_t i = 0; i < count; ++i) out[i] = tmp[i];
  }
  return out;
}

}  // namespace

std::size_t dtype_size(Dtype dtype) {
  return dtype == Dtype::kF32 ? sizeof(float) : sizeof(double);
}

void write_histogram(const std::filesystem::path& path, const TransientHistogram& hist,
                     HistogramLayout layout, Dtype dtype) {
  Writer w(path);
  write_histogram_header(w, hist, layout, dtype);
  if (layout == HistogramLayout::kXYT) {
    if (dtype == Dtype::kF64)
      write_values<double>(w, hist.data());
    else
      write_values<float>(w, hist.data());
  } else {
    // Time-major: one [x][y] slice per bin, so readers can stream.
    const std::size_t npx = hist.grid().pixel_count();
    const std::size_t nt = static_cast<std::size_t>(hist.nt());
    std::vector<double> slice(npx);
    const double* data = hist.data().data();
    for (std::size_t n = 0; n < nt; ++n) {
      for (std::size_t px = 0; px < npx; ++px) slice[px] = data[px * nt + n];
      if (dtype == Dtype::kF64)
        write_values<double>(w, slice);
      else
        write_values<float>(w, slice);
    }
  }
  w.finish();
}

TransientHistogram read_histogram(const std::filesystem::path& path) {
  Reader r(path);
  const HistogramHeader h = read_histogram_header(r);
  auto raw = read_values(r, h.values, h.info.dtype, "histogram payload");
  const std::size_t npx = h.info.grid.pixel_count();
  const std::size_t nt = static_cast<std::size_t>(h.info.nt);
  if (h.info.layout == HistogramLayout::kXYT)
    return TransientHistogram(h.info.grid, h.info.nt, h.info.bin_length,
                              h.info.falloff_k, std::move(raw));
  std::vector<double> data(npx * nt);
  for (std::size_t n = 0; n < nt; ++n)
    for (std::size_t px = 0; px < npx; ++px) data[px * nt + n] = raw[n * npx + px];
  return TransientHistogram(h.info.grid, h.info.nt, h.info.bin_length,
                            h.info.falloff_k, std::move(data));
}

HistogramFileInfo read_histogram_info(const std::filesystem::path& path) {
  Reader r(path);
  return read_histogram_header(r).info;
}

namespace {

class FileSliceStream final : public BinSliceStream {
 public:
  FileSliceStream(const std::filesystem::path& path, const HistogramFileInfo& info)
      : BinSliceStream(info.grid, info.nt, info.bin_length, info.falloff_k),
        reader_(path),
        dtype_(info.dtype) {
    HistogramHeader h = read_histogram_header(reader_);  // re-validates, positions
    (void)h;
  }

  bool next(std::span<double> slice) override {
    if (n_ >= nt()) return false;
    if (slice.size() != grid().pixel_count())
      throw StreamError("bin stream: slice buffer has " +
                        std::to_string(slice.size()) + " elements, expected " +
                        std::to_string(grid().pixel_count()));
    const std::uint64_t npx = grid().pixel_count();
    if (dtype_ == Dtype::kF64) {
      reader_.read_bytes(slice.data(), npx * sizeof(double), "bin slice");
    } else {
      scratch_.resize(npx);
      reader_.read_bytes(scratch_.data(), npx * sizeof(float), "bin slice");
      for (std::uint64_t i = 0; i < npx; ++i) slice[i] = scratch_[i];
    }
    ++n_;
    return true;
  }

 private:
  Reader reader_;
  Dtype dtype_;
  std::vector<float> scratch_;
  int n_ = 0;
};

}  // namespace

std::unique_ptr<BinSliceStream> open_bin_stream(const std::filesystem::path& path) {
  const HistogramFileInfo info = read_histogram_info(path);
  if (info.layout != HistogramLayout::kTXY)
    throw FormatError(path.string() +
                      ": layout 0 ([x][y][t]) is not streamable; transpose first");
  return std::make_unique<FileSliceStream>(path, info);
}

void transpose_histogram_file(const std::filesystem::path& in,
                              const std::filesystem::path& out) {
  const HistogramFileInfo info = read_histogram_info(in);
  const TransientHistogram hist = read_histogram(in);
  const HistogramLayout flipped = info.layout == HistogramLayout::kXYT
                                      ? HistogramLayout::kTXY
                                      : HistogramLayout::kXYT;
  write_histogram(out, hist, flipped, info.dtype);
}

void write_events(const std::filesystem::path& path, const PhotonEventList& events) {
  Writer w(path);
  w.put_bytes(kEventMagic, 8);
  w.put<std::uint32_t>(kFormatVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(events.grid().nx()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(events.grid().ny()));
  w.put<double>(events.grid().pitch());
  w.put<double>(events.grid().origin().x);
  w.put<double>(events.grid().origin().y);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(events.falloff_k()));
  w.put<std::uint64_t>(events.events().size());
  for (const PhotonEvent& e : events.events()) {
    w.put<std::uint32_t>(e.pixel_i);
    w.put<std::uint32_t>(e.pixel_j);
    w.put<double>(e.tof_path);
  }
  w.finish();
}

namespace {

EventFileInfo read_event_header(Reader& r) {
  r.expect_magic(kEventMagic, "event");
  r.expect_version();
  const auto nx = r.get<std::uint32_t>("nx");
  const auto ny = r.get<std::uint32_t>("ny");
  const auto pitch = r.get<double>("pitch");
  const auto ox = r.get<double>("origin_x");
  const auto oy = r.get<double>("origin_y");
  const auto k = r.get<std::uint32_t>("falloff_k");
  const auto count = r.get<std::uint64_t>("event_count");
  EventFileInfo info{WallGrid(static_cast<int>(nx), static_cast<int>(ny), pitch,
                              {ox, oy}),
                     static_cast<int>(k), count};
  r.expect_payload_bytes(count * 16, "event records");
  return info;
}

}  // namespace

EventFileInfo read_event_info(const std::filesystem::path& path) {
  Reader r(path);
  return read_event_header(r);
}

void for_each_event_in_file(
    const std::filesystem::path& path,
    const std::function<void(std::uint32_t, std::uint32_t, double)>& sink) {
  Reader r(path);
  const EventFileInfo info = read_event_header(r);
  constexpr std::uint64_t kChunk = 4096;
  struct Record {
    std::uint32_t i;
    std::uint32_t j;
    double tof;
  };
  static_assert(sizeof(Record) == 16);
  std::vector<Record> buf;
  std::uint64_t remaining = info.event_count;
  while (remaining > 0) {
    const std::uint64_t take = std::min(kChunk, remaining);
    buf.resize(take);
    r.read_bytes(buf.data(), take * sizeof(Record), "event records");
    for (const Record& rec : buf) sink(rec.i, rec.j, rec.tof);
    remaining -= take;
  }
}

PhotonEventList read_events(const std::filesystem::path& path) {
  Reader r(path);
  const EventFileInfo info = read_event_header(r);
  std::vector<PhotonEvent> events;
  events.reserve(info.event_count);
  for_each_event_in_file(path, [&events](std::uint32_t i, std::uint32_t j, double tof) {
    events.push_back({i, j, tof});
  });
  return PhotonEventList(info.grid, info.falloff_k, std::move(events));
}

namespace {

void write_field_impl(const std::filesystem::path& path, const WallGrid& grid,
                      double s, int falloff_k,
                      std::span<const std::complex<double>> data) {
  Writer w(path);
  w.put_bytes(kFieldMagic, 8);
  w.put<std::uint32_t>(kFormatVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(grid.nx()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(grid.ny()));
  w.put<double>(grid.pitch());
  w.put<double>(grid.origin().x);
  w.put<double>(grid.origin().y);
  w.put<double>(s);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(falloff_k));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(Dtype::kF64));
  w.put_bytes(data.data(), data.size() * sizeof(std::complex<double>));
  w.finish();
}

}  // namespace

void write_field(const std::filesystem::path& path, const AggregatedField& field) {
  write_field_impl(path, field.grid(), field.s(), field.falloff_k(), field.data());
}

void write_field(const std::filesystem::path& path, const ModulatedAlbedo& psi,
                 int falloff_k) {
  write_field_impl(path, psi.grid(), psi.s(), falloff_k, psi.data());
}

AggregatedField read_field(const std::filesystem::path& path) {
  Reader r(path);
  r.expect_magic(kFieldMagic, "field");
  r.expect_version();
  const auto nx = r.get<std::uint32_t>("nx");
  const auto ny = r.get<std::uint32_t>("ny");
  const auto pitch = r.get<double>("pitch");
  const auto ox = r.get<double>("origin_x");
  const auto oy = r.get<double>("origin_y");
  const auto s = r.get<double>("s");
  const auto k = r.get<std::uint32_t>("falloff_k");
  const auto dtype = dtype_from_u32(r, r.get<std::uint32_t>("dtype"));
  if (dtype != Dtype::kF64)
    throw FormatError(path.string() + ": field files are stored as f64");
  const std::uint64_t count = std::uint64_t{nx} * ny;
  r.expect_payload_bytes(count * sizeof(std::complex<double>), "field");
  std::vector<std::complex<double>> data(count);
  r.read_bytes(data.data(), count * sizeof(std::complex<double>), "field payload");
  return AggregatedField(WallGrid(static_cast<int>(nx), static_cast<int>(ny), pitch,
                                  {ox, oy}),
                         s, static_cast<int>(k), std::move(data));
}

void write_reconstruction(const std::filesystem::path& path, const Reconstruction& rec) {
  Writer w(path);
  w.put_bytes(kReconMagic, 8);
  w.put<std::uint32_t>(kFormatVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(rec.grid.nx()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(rec.grid.ny()));
  w.put<double>(rec.grid.pitch());
  w.put<double>(rec.grid.origin().x);
  w.put<double>(rec.grid.origin().y);
  w.put_bytes(rec.albedo.data(), rec.albedo.size() * sizeof(double));
  w.put_bytes(rec.depth.data(), rec.depth.size() * sizeof(double));
  w.put_bytes(rec.valid.data(), rec.valid.size());
  w.finish();
}

Reconstruction read_reconstruction(const std::filesystem::path& path) {
  Reader r(path);
  r.expect_magic(kReconMagic, "reconstruction");
  r.expect_version();
  const auto nx = r.get<std::uint32_t>("nx");
  const auto ny = r.get<std::uint32_t>("ny");
  const auto pitch = r.get<double>("pitch");
  const auto ox = r.get<double>("origin_x");
  const auto oy = r.get<double>("origin_y");
  const std::uint64_t count = std::uint64_t{nx} * ny;
  r.expect_payload_bytes(count * (2 * sizeof(double) + 1), "reconstruction");
  std::vector<double> albedo(count), depth(count);
  std::vector<std::uint8_t> valid(count);
  r.read_bytes(albedo.data(), count * sizeof(double), "albedo");
  r.read_bytes(depth.data(), count * sizeof(double), "depth");
  r.read_bytes(valid.data(), count, "mask");
  return Reconstruction::checked(
      WallGrid(static_cast<int>(nx), static_cast<int>(ny), pitch, {ox, oy}),
      std::move(albedo), std::move(depth), std::move(valid));
}

void write_image_pgm(const std::filesystem::path& path, std::span<const double> map,
                     int nx, int ny, PgmNormalization norm, double percentile) {
  if (nx < 1 || ny < 1 ||
      map.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny))
    throw DataError("write_image_pgm: map size does not match nx * ny");
  double ceiling = 0.0;
  if (norm == PgmNormalization::kMax) {
    for (double v : map) ceiling = std::max(ceiling, v);
  } else {
    if (!(percentile > 0.0) || !(percentile <= 100.0))
      throw ParameterError("write_image_pgm: percentile must be in (0, 100]");
    std::vector<double> sorted(map.begin(), map.end());
    std::sort(sorted.begin(), sorted.end());
    // Nearest-rank percentile.
    const std::size_t rank = static_cast<std::size_t>(
        std::ceil(percentile / 100.0 * static_cast<double>(sorted.size())));
    ceiling = sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
  }

  Writer w(path);
  std::ostringstream header;
  header << "P5\n" << nx << " " << ny << "\n65535\n";
  const std::string head = header.str();
  w.put_bytes(head.data(), head.size());
  std::vector<std::uint8_t> row(static_cast<std::size_t>(nx) * 2);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double v = map[static_cast<std::size_t>(i) * ny + j];
      std::uint16_t q = 0;
      if (ceiling > 0.0) {
        const double scaled = std::clamp(v / ceiling, 0.0, 1.0) * 65535.0;
        q = static_cast<std::uint16_t>(std::lround(scaled));
      }
      row[static_cast<std::size_t>(i) * 2] = static_cast<std::uint8_t>(q >> 8);
      row[static_cast<std::size_t>(i) * 2 + 1] = static_cast<std::uint8_t>(q & 0xff);
    }
    w.put_bytes(row.data(), row.size());
  }
  w.finish();
}

SceneSurfels read_scene_text(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open scene file: " + path.string());
  std::vector<Surfel> surfels;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    Surfel p;
    if (!(ls >> p.x)) continue;  // blank or comment-only line
    if (!(ls >> p.y >> p.z >> p.albedo))
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": expected 'x y z albedo'");
    std::string trailing;
    if (ls >> trailing)
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": unexpected trailing token '" + trailing + "'");
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) ||
        !std::isfinite(p.albedo) || !(p.z > 0.0) || p.albedo < 0.0)
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": surfel needs finite coordinates, z > 0, albedo >= 0");
    surfels.push_back(p);
  }
  return SceneSurfels(std::move(surfels));
}

void write_scene_text(const std::filesystem::path& path, const SceneSurfels& scene) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw FormatError("cannot open for writing: " + path.string());
  os.precision(17);
  for (const Surfel& p : scene.surfels())
    os << p.x << " " << p.y << " " << p.z << " " << p.albedo << "\n";
  if (!os) throw FormatError("write failed: " + path.string());
}

}  // namespace qfnlos
