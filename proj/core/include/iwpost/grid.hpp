#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "iwpost/model.hpp"

namespace iwpost {

/// Rectangular lattice of cells over [lo, hi]. Each cell is represented by its
/// center (midpoint rule), so a cell pairs one location with one volume.
/// Flat index runs with dimension 0 fastest.
class Grid {
 public:
  Grid(Vector lo, Vector hi, std::vector<std::size_t> points_per_dim);

  /// [-6, 6] in every dimension with 161 points per dimension.
  static Grid default_for(std::size_t dim);
  static constexpr double kDefaultHalfWidth = 6.0;
  static constexpr std::size_t kDefaultPoints = 161;

  std::size_t dim() const noexcept { return points_.size(); }
  const Vector& lo() const noexcept { return lo_; }
  const Vector& hi() const noexcept { return hi_; }
  const std::vector<std::size_t>& points_per_dim() const noexcept { return points_; }
  double spacing(std::size_t d) const { return (hi_[static_cast<Eigen::Index>(d)] - lo_[static_cast<Eigen::Index>(d)]) / static_cast<double>(points_[d]); }
  double cell_volume() const noexcept { return cell_volume_; }
  std::size_t size() const noexcept { return size_; }

  LatentPoint cell_center(std::size_t flat) const;
  /// Index of the cell containing z, or nullopt outside [lo, hi).
  std::optional<std::size_t> locate(const LatentPoint& z) const;

  bool operator==(const Grid& other) const;

 private:
  Vector lo_;
  Vector hi_;
  std::vector<std::size_t> points_;
  double cell_volume_ = 0.0;
  std::size_t size_ = 0;
};

/// Nonnegative per-cell values over a grid (a density, not a mass).
class DensityField {
 public:
  /// Throws ArgumentError on size mismatch, NaN or negative values.
  DensityField(Grid grid, std::vector<double> values);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }
  double max_value() const;

 private:
  Grid grid_;
  std::vector<double> values_;
};

}  // namespace iwpost
