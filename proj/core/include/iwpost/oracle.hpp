#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "iwpost/grid.hpp"
#include "iwpost/model.hpp"

namespace iwpost {

// Deterministic grid quadrature: the ground truth every Monte Carlo path is checked against.
// All sums run in flat cell order, so results do not depend on the thread count.

/// Evaluates `density` at every cell center.
DensityField density_field(const Grid& grid, const std::function<double(const LatentPoint&)>& density);

/// q's normalized density on the grid.
DensityField proposal_field(const GaussianProposal& q, const Grid& grid);

/// exp(log p(x, z)) on the grid, unnormalized.
DensityField target_field(const TargetModel& t, const Grid& grid);

/// Midpoint rule: sum(values) * cell_volume.
double quadrature(const DensityField& field);

/// log of the quadrature of exp(log p(x, z)), accumulated in log space. When the
/// target knows its normalizer, a disagreement beyond 1e-3 * max(1, |known|)
/// throws DiagnosticError (grid too narrow or too coarse).
double log_marginal(const TargetModel& t, const Grid& grid);

/// exp(log p(x, z) - log_marginal) per cell; integrates to 1 on the grid.
DensityField true_posterior_field(const TargetModel& t, const Grid& grid);

/// KL(approx || reference) = sum approx * log(approx / reference) * cell_volume.
///
/// Argument order follows KL(q||p): the FIRST argument is the reference
/// (posterior), the SECOND the approximation. Cells with approx <= 1e-300 are
/// skipped (0 log 0 = 0). Approximation mass where the reference is zero yields
/// +infinity rather than an exception.
double kl_field(const DensityField& reference, const DensityField& approx);

double max_abs_error(const DensityField& a, const DensityField& b);

/// Half the L1 distance between the two fields' cell masses.
double total_variation(const DensityField& a, const DensityField& b);

/// Empirical density: count / (n * cell_volume). Samples outside the grid still
/// count toward n, so the field integrates to the in-grid fraction.
DensityField histogram_field(std::span<const LatentPoint> samples, const Grid& grid);

/// Merges blocks of `factor` cells per dimension, averaging densities (mass preserving).
/// Every points_per_dim entry must be divisible by `factor`.
DensityField coarsen(const DensityField& field, std::size_t factor);

}  // namespace iwpost
