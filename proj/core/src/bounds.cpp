#include "iwpost/bounds.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "iwpost/error.hpp"
#include "iwpost/oracle.hpp"
#include "iwpost/parallel.hpp"
#include "iwpost/stats.hpp"
#include "iwpost/weights.hpp"

namespace iwpost {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kJackknifeGroups = 10;
constexpr double kUnderflow = 1e-300;

void require_compatible(const TargetModel& t, const GaussianProposal& q) {
  if (t.dim() != q.dim()) throw ArgumentError("target and proposal dimensions differ");
}

BoundEstimate summarize(std::span<const double> replicates, BoundKind kind) {
  for (double v : replicates) {
    if (std::isnan(v)) throw NumericError("bound replicate is NaN");
    if (v == kNegInf) return {kNegInf, std::numeric_limits<double>::infinity(), replicates.size(), kind};
  }
  const auto [mean, se] = mean_std_error(replicates);
  return {mean, se, replicates.size(), kind};
}

double entropy_term(std::span<const double> field, std::span<const double> log_p, double cell_volume) {
  double acc = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double f = field[i];
    if (f < kUnderflow) continue;
    acc += f * (log_p[i] - std::log(f));
  }
  return acc * cell_volume;
}

}  // namespace

std::string_view to_string(BoundKind kind) noexcept {
  switch (kind) {
    case BoundKind::vae:
      return "vae";
    case BoundKind::iwae:
      return "iwae";
    case BoundKind::vae_qiw_expected:
      return "vae_qiw_expected";
    case BoundKind::vae_qew:
      return "vae_qew";
  }
  return "unknown";
}

BoundEstimate vae_elbo_mc(const TargetModel& t, const GaussianProposal& q, std::size_t n, RngStream& rng) {
  require_compatible(t, q);
  if (n < 2) throw ArgumentError("vae_elbo_mc needs n >= 2");
  const auto values =
      replicate<double>(n, rng, [&](RngStream& stream) { return log_weight(t, q, proposal_sample(q, stream)); });
  return summarize(values, BoundKind::vae);
}

BoundEstimate iwae_elbo_mc(const TargetModel& t, const GaussianProposal& q, std::size_t k, std::size_t n_batches,
                           RngStream& rng) {
  require_compatible(t, q);
  if (k == 0) throw ArgumentError("iwae_elbo_mc needs k >= 1");
  if (n_batches < 2) throw ArgumentError("iwae_elbo_mc needs n_batches >= 2");
  const auto values = replicate<double>(n_batches, rng, [&](RngStream& stream) {
    std::vector<double> log_w(k);
    for (auto& lw : log_w) lw = log_weight(t, q, proposal_sample(q, stream));
    const double v = log_mean_exp(log_w);
    if (v == kNegInf) throw NumericError("IWAE batch has every importance weight equal to zero");
    return v;
  });
  return summarize(values, BoundKind::iwae);
}

double vae_elbo_quadrature(const TargetModel& t, const GaussianProposal& q, const Grid& grid) {
  const auto cells = evaluate_cells(t, q, grid);
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double dq = std::exp(cells.log_q[i]);
    if (dq < kUnderflow) continue;
    acc += dq * (cells.log_p[i] - cells.log_q[i]);
  }
  return acc * grid.cell_volume();
}

double vae_bound_of_qiw_quadrature(const CellLogDensities& cells, const Grid& grid, double log_rest_sum,
                                   std::size_t k) {
  if (cells.log_p.size() != grid.size()) throw ArgumentError("cell densities do not match the grid");
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double log_qiw = qiw_log_from_parts(cells.log_p[i], cells.log_q[i], log_rest_sum, k);
    const double f = std::exp(log_qiw);
    if (f < kUnderflow) continue;
    acc += f * (cells.log_p[i] - log_qiw);
  }
  return acc * grid.cell_volume();
}

double vae_bound_of_qiw_quadrature(const TargetModel& t, const GaussianProposal& q,
                                   std::span<const LatentPoint> z_rest, const Grid& grid) {
  const QiwContext ctx(t, q, z_rest);
  const auto cells = evaluate_cells(t, q, grid);
  return vae_bound_of_qiw_quadrature(cells, grid, ctx.log_rest_sum(), ctx.k());
}

BoundEstimate expected_vae_bound_of_qiw(const TargetModel& t, const GaussianProposal& q, std::size_t k,
                                        std::size_t n_batches, const Grid& grid, RngStream& rng) {
  if (k == 0) throw ArgumentError("k must be at least 1");
  if (n_batches < 2) throw ArgumentError("need at least two conditioning batches");
  const auto cells = evaluate_cells(t, q, grid);
  const auto values = replicate<double>(n_batches, rng, [&](RngStream& stream) {
    return vae_bound_of_qiw_quadrature(cells, grid, draw_log_rest_sum(t, q, k, stream), k);
  });
  return summarize(values, BoundKind::vae_qiw_expected);
}

BoundEstimate vae_elbo_qew_quadrature(const TargetModel& t, const GaussianProposal& q, std::size_t k,
                                      std::size_t S, const Grid& grid, RngStream& rng) {
  if (S < 50) throw ArgumentError("vae_elbo_qew_quadrature needs S >= 50");
  const auto render = render_qew(t, q, k, S, grid, rng, kJackknifeGroups);
  const double mass = quadrature(render.field);
  if (std::abs(mass - 1.0) > 0.05) {
    throw DiagnosticError("q_ew field mass " + std::to_string(mass) +
                          " deviates from 1 by more than 0.05; widen the grid or raise S");
  }
  const auto cells = evaluate_cells(t, q, grid);
  const double value = entropy_term(render.field.values(), cells.log_p, grid.cell_volume());

  // Delete-a-group jackknife over contiguous blocks of batches.
  const std::size_t groups = render.group_sums.size();
  std::vector<double> leave_out(groups);
  std::vector<double> field(grid.size());
  for (std::size_t g = 0; g < groups; ++g) {
    const double remaining = static_cast<double>(S - render.group_sizes[g]);
    for (std::size_t i = 0; i < field.size(); ++i) {
      double sum = 0.0;
      for (std::size_t h = 0; h < groups; ++h) {
        if (h != g) sum += render.group_sums[h][i];
      }
      field[i] = sum / remaining;
    }
    leave_out[g] = entropy_term(field, cells.log_p, grid.cell_volume());
  }
  double mean = 0.0;
  for (double v : leave_out) mean += v;
  mean /= static_cast<double>(groups);
  double ss = 0.0;
  for (double v : leave_out) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss * static_cast<double>(groups - 1) / static_cast<double>(groups));
  return {value, se, S, BoundKind::vae_qew};
}

}  // namespace iwpost
