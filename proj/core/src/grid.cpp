#include "iwpost/grid.hpp"

#include <algorithm>
#include <cmath>

#include "iwpost/error.hpp"

namespace iwpost {

Grid::Grid(Vector lo, Vector hi, std::vector<std::size_t> points_per_dim)
    : lo_(std::move(lo)), hi_(std::move(hi)), points_(std::move(points_per_dim)) {
  if (points_.empty()) throw ArgumentError("grid needs at least one dimension");
  if (static_cast<std::size_t>(lo_.size()) != points_.size() || static_cast<std::size_t>(hi_.size()) != points_.size()) {
    throw ArgumentError("grid bounds and resolution have different dimensions");
  }
  cell_volume_ = 1.0;
  size_ = 1;
  for (std::size_t d = 0; d < points_.size(); ++d) {
    const auto i = static_cast<Eigen::Index>(d);
    if (!(lo_[i] < hi_[i]) || !std::isfinite(lo_[i]) || !std::isfinite(hi_[i])) {
      throw ArgumentError("grid needs finite lo < hi in every dimension");
    }
    if (points_[d] == 0) throw ArgumentError("grid needs at least one point per dimension");
    cell_volume_ *= spacing(d);
    size_ *= points_[d];
  }
}

Grid Grid::default_for(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return Grid(Vector::Constant(n, -kDefaultHalfWidth), Vector::Constant(n, kDefaultHalfWidth),
              std::vector<std::size_t>(dim, kDefaultPoints));
}

LatentPoint Grid::cell_center(std::size_t flat) const {
  LatentPoint z(static_cast<Eigen::Index>(dim()));
  for (std::size_t d = 0; d < points_.size(); ++d) {
    const std::size_t i = flat % points_[d];
    flat /= points_[d];
    const auto e = static_cast<Eigen::Index>(d);
    z[e] = lo_[e] + (static_cast<double>(i) + 0.5) * spacing(d);
  }
  return z;
}

std::optional<std::size_t> Grid::locate(const LatentPoint& z) const {
  if (static_cast<std::size_t>(z.size()) != dim()) throw ArgumentError("point and grid dimensions differ");
  std::size_t flat = 0;
  std::size_t stride = 1;
  for (std::size_t d = 0; d < points_.size(); ++d) {
    const auto e = static_cast<Eigen::Index>(d);
    if (!(z[e] >= lo_[e]) || !(z[e] < hi_[e])) return std::nullopt;
    auto i = static_cast<std::size_t>((z[e] - lo_[e]) / spacing(d));
    i = std::min(i, points_[d] - 1);
    flat += i * stride;
    stride *= points_[d];
  }
  return flat;
}

bool Grid::operator==(const Grid& other) const {
  return points_ == other.points_ && lo_ == other.lo_ && hi_ == other.hi_;
}

DensityField::DensityField(Grid grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw ArgumentError("field size does not match its grid");
  for (double v : values_) {
    if (std::isnan(v) || v < 0.0) throw ArgumentError("density field values must be nonnegative and not NaN");
  }
}

double DensityField::max_value() const {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

}  // namespace iwpost
