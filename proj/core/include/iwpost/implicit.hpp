#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "iwpost/grid.hpp"
#include "iwpost/model.hpp"
#include "iwpost/rng.hpp"

namespace iwpost {

// The implicit distributions that importance weighting induces on a Gaussian proposal q.
//
// Given a conditioning batch z_2..z_k ~ q with weights w_j = p(x, z_j) / q(z_j | x),
//
//   q_iw(z | z_2..z_k) = p(x, z) / ((1/k) (p(x, z) / q(z | x) + sum_{j>=2} w_j))
//
// is an unnormalized density that equals q at k = 1 and tilts toward the posterior as k grows.
// Its average over batches, q_ew(z) = E[q_iw(z | z_2..z_k)], is a normalized density and is
// exactly the law of sampling-importance-resampling with k proposals.
//
// Everything is evaluated in log space; the density is exponentiated once at the end.

/// A target, a proposal and the log weights of a conditioning batch z_2..z_k.
/// k = rest_log_w().size() + 1.
class QiwContext {
 public:
  QiwContext(TargetModel target, GaussianProposal proposal, std::span<const LatentPoint> rest);

  static QiwContext from_log_weights(TargetModel target, GaussianProposal proposal, std::vector<double> rest_log_w);

  /// Draws the k - 1 conditioning points from the proposal.
  static QiwContext draw(TargetModel target, GaussianProposal proposal, std::size_t k, RngStream& rng);

  const TargetModel& target() const noexcept { return target_; }
  const GaussianProposal& proposal() const noexcept { return proposal_; }
  std::size_t k() const noexcept { return rest_log_w_.size() + 1; }
  const std::vector<double>& rest_log_w() const noexcept { return rest_log_w_; }

  /// log sum_{j>=2} w_j; -inf when k = 1 or every conditioning weight is zero.
  double log_rest_sum() const noexcept { return log_rest_sum_; }

 private:
  TargetModel target_;
  GaussianProposal proposal_;
  std::vector<double> rest_log_w_;
  double log_rest_sum_;
};

/// log q_iw at a location with known log p(x, z) and log q(z | x). Returns log_q
/// verbatim for k = 1 and -inf when log_p is -inf.
double qiw_log_from_parts(double log_p, double log_q, double log_rest_sum, std::size_t k) noexcept;

double qiw_log_density(const QiwContext& ctx, const LatentPoint& z);

/// exp(qiw_log_density). Zero where the target has zero density.
double qiw_unnorm_density(const QiwContext& ctx, const LatentPoint& z);

/// log sum_{j=2..k} w_j for one fresh batch of k - 1 proposal draws.
double draw_log_rest_sum(const TargetModel& t, const GaussianProposal& q, std::size_t k, RngStream& rng);

/// Monte Carlo estimate of q_ew(z): the mean of q_iw(z | batch) over S independent batches.
/// At k = 1 returns q's density without drawing.
double qew_density_mc(const TargetModel& t, const GaussianProposal& q, const LatentPoint& z, std::size_t k,
                      std::size_t S, RngStream& rng);

/// Index of the first cumulative weight >= u, for u in (0, 1]. Zero-probability
/// entries are never returned.
std::size_t sir_select(std::span<const double> probabilities, double u);

/// One draw from q_ew by sampling-importance-resampling: k proposals, normalized
/// weights, one categorical pick by inverse CDF on a single uniform.
/// Throws NumericError when every weight is zero.
LatentPoint sir_sample(const TargetModel& t, const GaussianProposal& q, std::size_t k, RngStream& rng);

/// n independent SIR draws on block substreams (thread-count independent).
std::vector<LatentPoint> sir_samples(const TargetModel& t, const GaussianProposal& q, std::size_t k,
                                     std::size_t n, RngStream& rng);

/// log p(x, z) and log q(z | x) at every cell center. Neither depends on the
/// conditioning batch, so one evaluation serves every batch.
struct CellLogDensities {
  std::vector<double> log_p;
  std::vector<double> log_q;
};

CellLogDensities evaluate_cells(const TargetModel& t, const GaussianProposal& q, const Grid& grid);

/// q_iw for one fixed batch on every cell.
DensityField qiw_field(const QiwContext& ctx, const Grid& grid);

/// Grid rendering of q_ew with per-group partial sums for resampling-based error bars.
struct QewRender {
  DensityField field;                           // accumulator / S
  std::vector<std::vector<double>> group_sums;  // raw per-cell sums over each contiguous block of batches
  std::vector<std::size_t> group_sizes;
};

/// Renders q_ew on the grid: S outer iterations each draw z_2..z_k, form the
/// partial weight sum p_hat = sum_{i>=2} w_i, and add
/// p(x, z) / ((1/k)(p(x, z)/q(z|x) + p_hat)) at every location; the result is the
/// accumulator divided by S. The per-location sum runs over batches in order.
/// At k = 1 the field is q's density and no batches are drawn.
QewRender render_qew(const TargetModel& t, const GaussianProposal& q, std::size_t k, std::size_t S,
                     const Grid& grid, RngStream& rng, std::size_t groups = 1);

DensityField plot_qew_grid(const TargetModel& t, const GaussianProposal& q, std::size_t k, std::size_t S,
                           const Grid& grid, RngStream& rng);

}  // namespace iwpost
