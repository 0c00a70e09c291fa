#pragma once

#include <cstddef>
#include <utility>

namespace qfnlos {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// Regular square-pixel scan grid on the relay wall plane z = 0.
/// Pixel (i, j) sits at origin + (i, j) * pitch.
class WallGrid {
 public:
  /// Trivial 1 x 1 grid with unit pitch.
  WallGrid() : nx_(1), ny_(1), pitch_(1.0) {}
  WallGrid(int nx, int ny, double pitch, Vec2 origin = {});

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double pitch() const { return pitch_; }
  Vec2 origin() const { return origin_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_);
  }

  Vec2 pixel_center(int i, int j) const {
    return {origin_.x + i * pitch_, origin_.y + j * pitch_};
  }

  /// Inverse of pixel_center, by rounding. Exact round-trip for all valid
  /// indices; the returned pair may lie outside the grid for far-away points.
  std::pair<int, int> index_of(Vec2 p) const;

  bool contains(int i, int j) const {
    return i >= 0 && i < nx_ && j >= 0 && j < ny_;
  }

  /// Row-major flat index, data[i][j] -> i * ny + j.
  std::size_t flat(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(ny_) +
           static_cast<std::size_t>(j);
  }

  friend bool operator==(const WallGrid&, const WallGrid&) = default;

 private:
  int nx_;
  int ny_;
  double pitch_;
  Vec2 origin_;
};

}  // namespace qfnlos
