#include "iwpost/field_io.hpp"

#include <fmt/format.h>

#include <cmath>

#include "iwpost/atomic_file.hpp"
#include "iwpost/error.hpp"

namespace iwpost {

namespace {

std::string coordinate_header(std::size_t dim) {
  static constexpr const char* kNames[] = {"x", "y", "z"};
  std::string header;
  for (std::size_t d = 0; d < dim; ++d) {
    if (d) header += ',';
    header += d < 3 ? std::string(kNames[d]) : fmt::format("z{}", d);
  }
  return header;
}

void append_point(std::string& out, const LatentPoint& z) {
  for (Eigen::Index d = 0; d < z.size(); ++d) {
    if (d) out += ',';
    out += fmt::format("{:.17g}", z[d]);
  }
}

}  // namespace

std::string field_to_csv(const DensityField& field) {
  const Grid& grid = field.grid();
  std::string out = coordinate_header(grid.dim()) + ",value\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    append_point(out, grid.cell_center(i));
    out += fmt::format(",{:.17g}\n", field[i]);
  }
  return out;
}

std::string field_to_pgm(const DensityField& field) {
  const Grid& grid = field.grid();
  if (grid.dim() > 2) throw ArgumentError("PGM output needs a 1D or 2D field");
  const std::size_t width = grid.points_per_dim()[0];
  const std::size_t height = grid.dim() == 2 ? grid.points_per_dim()[1] : 1;
  const double peak = field.max_value();
  std::string out = fmt::format("P2\n{} {}\n255\n", width, height);
  for (std::size_t row = 0; row < height; ++row) {
    const std::size_t y = height - 1 - row;
    for (std::size_t x = 0; x < width; ++x) {
      const double v = field[x + width * y];
      const long level = peak > 0.0 ? std::lround(255.0 * v / peak) : 0;
      if (x) out += ' ';
      out += std::to_string(level);
    }
    out += '\n';
  }
  return out;
}

std::string samples_to_csv(std::span<const LatentPoint> samples) {
  const std::size_t dim = samples.empty() ? 1 : static_cast<std::size_t>(samples.front().size());
  std::string out = coordinate_header(dim) + "\n";
  for (const auto& z : samples) {
    append_point(out, z);
    out += '\n';
  }
  return out;
}

void write_field_csv(const std::filesystem::path& path, const DensityField& field) {
  write_file_atomic(path, field_to_csv(field));
}

void write_field_pgm(const std::filesystem::path& path, const DensityField& field) {
  write_file_atomic(path, field_to_pgm(field));
}

}  // namespace iwpost
