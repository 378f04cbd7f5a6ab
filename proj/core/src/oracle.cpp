#include "iwpost/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "iwpost/error.hpp"
#include "iwpost/parallel.hpp"
#include "iwpost/weights.hpp"

namespace iwpost {

namespace {

void require_same_grid(const DensityField& a, const DensityField& b) {
  if (!(a.grid() == b.grid())) throw ArgumentError("fields live on different grids");
}

void require_dim(const Grid& grid, std::size_t dim) {
  if (grid.dim() != dim) throw ArgumentError("grid and model dimensions differ");
}

std::vector<double> log_target_values(const TargetModel& t, const Grid& grid) {
  require_dim(grid, t.dim());
  std::vector<double> lp(grid.size());
  parallel_for(grid.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) lp[i] = target_log_density(t, grid.cell_center(i));
  });
  return lp;
}

}  // namespace

DensityField density_field(const Grid& grid, const std::function<double(const LatentPoint&)>& density) {
  std::vector<double> values(grid.size());
  parallel_for(grid.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) values[i] = density(grid.cell_center(i));
  });
  return DensityField(grid, std::move(values));
}

DensityField proposal_field(const GaussianProposal& q, const Grid& grid) {
  require_dim(grid, q.dim());
  return density_field(grid, [&](const LatentPoint& z) { return std::exp(proposal_log_density_unchecked(q, z)); });
}

DensityField target_field(const TargetModel& t, const Grid& grid) {
  auto lp = log_target_values(t, grid);
  for (double& v : lp) v = std::exp(v);
  return DensityField(grid, std::move(lp));
}

double quadrature(const DensityField& field) {
  double acc = 0.0;
  for (double v : field.values()) acc += v;
  return acc * field.grid().cell_volume();
}

double log_marginal(const TargetModel& t, const Grid& grid) {
  const auto lp = log_target_values(t, grid);
  const double log_z = log_sum_exp(lp) + std::log(grid.cell_volume());
  if (const auto known = t.known_log_z()) {
    if (std::abs(log_z - *known) > 1e-3 * std::max(1.0, std::abs(*known))) {
      throw DiagnosticError("quadrature log normalizer " + std::to_string(log_z) + " disagrees with known value " +
                            std::to_string(*known) + " for target '" + t.name() + "'");
    }
  }
  return log_z;
}

DensityField true_posterior_field(const TargetModel& t, const Grid& grid) {
  auto lp = log_target_values(t, grid);
  const double log_z = log_sum_exp(lp) + std::log(grid.cell_volume());
  if (!std::isfinite(log_z)) throw DiagnosticError("target has no mass on the grid");
  for (double& v : lp) v = std::exp(v - log_z);
  return DensityField(grid, std::move(lp));
}

double kl_field(const DensityField& reference, const DensityField& approx) {
  require_same_grid(reference, approx);
  const double ref_mass = quadrature(reference);
  if (std::abs(ref_mass - 1.0) > 0.02) {
    throw DiagnosticError("kl_field reference is not normalized (mass " + std::to_string(ref_mass) + ")");
  }
  const auto p = reference.values();
  const auto q = approx.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= 1e-300) continue;
    if (p[i] <= 0.0) return std::numeric_limits<double>::infinity();
    acc += q[i] * (std::log(q[i]) - std::log(p[i]));
  }
  return acc * approx.grid().cell_volume();
}

double max_abs_error(const DensityField& a, const DensityField& b) {
  require_same_grid(a, b);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

double total_variation(const DensityField& a, const DensityField& b) {
  require_same_grid(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return 0.5 * acc * a.grid().cell_volume();
}

DensityField histogram_field(std::span<const LatentPoint> samples, const Grid& grid) {
  if (samples.empty()) throw ArgumentError("histogram of an empty sample");
  std::vector<double> counts(grid.size(), 0.0);
  for (const auto& z : samples) {
    if (auto cell = grid.locate(z)) counts[*cell] += 1.0;
  }
  const double scale = 1.0 / (static_cast<double>(samples.size()) * grid.cell_volume());
  for (double& c : counts) c *= scale;
  return DensityField(grid, std::move(counts));
}

DensityField coarsen(const DensityField& field, std::size_t factor) {
  const Grid& fine = field.grid();
  if (factor == 0) throw ArgumentError("coarsening factor must be positive");
  std::vector<std::size_t> coarse_points;
  for (std::size_t n : fine.points_per_dim()) {
    if (n % factor != 0) throw ArgumentError("grid resolution is not divisible by the coarsening factor");
    coarse_points.push_back(n / factor);
  }
  Grid coarse(fine.lo(), fine.hi(), coarse_points);
  std::vector<double> values(coarse.size(), 0.0);
  for (std::size_t flat = 0; flat < fine.size(); ++flat) {
    std::size_t rem = flat;
    std::size_t target = 0;
    std::size_t stride = 1;
    for (std::size_t d = 0; d < fine.dim(); ++d) {
      const std::size_t i = rem % fine.points_per_dim()[d];
      rem /= fine.points_per_dim()[d];
      target += (i / factor) * stride;
      stride *= coarse_points[d];
    }
    values[target] += field[flat];
  }
  const double cells_per_block = std::pow(static_cast<double>(factor), static_cast<double>(fine.dim()));
  for (double& v : values) v /= cells_per_block;
  return DensityField(std::move(coarse), std::move(values));
}

}  // namespace iwpost
