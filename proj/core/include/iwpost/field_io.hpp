#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "iwpost/grid.hpp"

namespace iwpost {

/// Header `x,value` (1D), `x,y,value` (2D), `x,y,z,value` (3D), then one row per
/// cell center in flat order.
std::string field_to_csv(const DensityField& field);

/// ASCII PGM (P2), maxval 255, values mapped linearly by the field maximum.
/// 2D fields put the highest y row first; 1D fields are a single row.
/// Throws ArgumentError for dim > 2.
std::string field_to_pgm(const DensityField& field);

/// One point per row under an `x[,y[,z]]` header.
std::string samples_to_csv(std::span<const LatentPoint> samples);

void write_field_csv(const std::filesystem::path& path, const DensityField& field);
void write_field_pgm(const std::filesystem::path& path, const DensityField& field);

}  // namespace iwpost
