#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "iwpost/grid.hpp"
#include "iwpost/implicit.hpp"
#include "iwpost/model.hpp"
#include "iwpost/rng.hpp"

namespace iwpost {

enum class BoundKind { vae, iwae, vae_qiw_expected, vae_qew };

std::string_view to_string(BoundKind kind) noexcept;

/// A bound value in nats with its standard error, always computed from replicates.
struct BoundEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  BoundKind kind = BoundKind::vae;
};

/// E_q[log p(x, z) - log q(z | x)] from n draws. n >= 2.
BoundEstimate vae_elbo_mc(const TargetModel& t, const GaussianProposal& q, std::size_t n, RngStream& rng);

/// E[log mean_i w_i] over n_batches batches of k fresh draws. With k = 1 and the same
/// stream it reproduces vae_elbo_mc draw for draw.
BoundEstimate iwae_elbo_mc(const TargetModel& t, const GaussianProposal& q, std::size_t k, std::size_t n_batches,
                           RngStream& rng);

/// Integral of q log(p / q) by grid quadrature.
double vae_elbo_quadrature(const TargetModel& t, const GaussianProposal& q, const Grid& grid);

/// Integral over z of q_iw(z | z_rest) log(p(x, z) / q_iw(z | z_rest)), by quadrature.
/// q_iw is unnormalized for a fixed batch, so this is the VAE bound formula applied to an
/// unnormalized measure; only its batch average is a bound.
double vae_bound_of_qiw_quadrature(const TargetModel& t, const GaussianProposal& q,
                                   std::span<const LatentPoint> z_rest, const Grid& grid);

/// Same, reusing precomputed cell log-densities and a batch's log partial weight sum.
double vae_bound_of_qiw_quadrature(const CellLogDensities& cells, const Grid& grid, double log_rest_sum,
                                   std::size_t k);

/// Mean of vae_bound_of_qiw_quadrature over n_batches fresh conditioning batches.
BoundEstimate expected_vae_bound_of_qiw(const TargetModel& t, const GaussianProposal& q, std::size_t k,
                                        std::size_t n_batches, const Grid& grid, RngStream& rng);

/// L_VAE[q_ew] = sum_cells f (log p - log f) * cell_volume with f the rendered q_ew field
/// (S batches). Cells with f < 1e-300 are skipped. The standard error is a delete-a-group
/// jackknife over 10 contiguous blocks of batches. Throws DiagnosticError when the field's
/// mass is off by more than 0.05 (grid or S too small). S >= 50.
BoundEstimate vae_elbo_qew_quadrature(const TargetModel& t, const GaussianProposal& q, std::size_t k,
                                      std::size_t S, const Grid& grid, RngStream& rng);

}  // namespace iwpost
