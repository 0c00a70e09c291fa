#include "qfnlos/grid.hpp"

#include <cmath>

#include "qfnlos/errors.hpp"

namespace qfnlos {

WallGrid::WallGrid(int nx, int ny, double pitch, Vec2 origin)
    : nx_(nx), ny_(ny), pitch_(pitch), origin_(origin) {
  if (nx < 1 || ny < 1) throw ParameterError("WallGrid: nx and ny must be >= 1");
  if (!(pitch > 0.0) || !std::isfinite(pitch))
    throw ParameterError("WallGrid: pitch must be positive and finite");
  if (!std::isfinite(origin.x) || !std::isfinite(origin.y))
    throw ParameterError("WallGrid: origin must be finite");
}

std::pair<int, int> WallGrid::index_of(Vec2 p) const {
  const int i = static_cast<int>(std::llround((p.x - origin_.x) / pitch_));
  const int j = static_cast<int>(std::llround((p.y - origin_.y) / pitch_));
  return {i, j};
}

}  // namespace qfnlos
