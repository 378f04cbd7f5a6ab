#include "iwpost/implicit.hpp"

#include <cmath>
#include <limits>

#include "iwpost/error.hpp"
#include "iwpost/parallel.hpp"
#include "iwpost/weights.hpp"

namespace iwpost {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_compatible(const TargetModel& t, const GaussianProposal& q) {
  if (t.dim() != q.dim()) throw ArgumentError("target and proposal dimensions differ");
}

void require_k(std::size_t k) {
  if (k == 0) throw ArgumentError("number of importance samples k must be at least 1");
}

double rest_sum(const std::vector<double>& rest_log_w) {
  if (rest_log_w.empty()) return kNegInf;
  return log_sum_exp(rest_log_w);
}

}  // namespace

QiwContext::QiwContext(TargetModel target, GaussianProposal proposal, std::span<const LatentPoint> rest)
    : target_(std::move(target)), proposal_(std::move(proposal)) {
  require_compatible(target_, proposal_);
  rest_log_w_.reserve(rest.size());
  for (const auto& z : rest) rest_log_w_.push_back(log_weight(target_, proposal_, z));
  log_rest_sum_ = rest_sum(rest_log_w_);
}

QiwContext QiwContext::from_log_weights(TargetModel target, GaussianProposal proposal, std::vector<double> rest_log_w) {
  for (double v : rest_log_w) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
      throw ArgumentError("conditioning log weights must be finite or -inf");
    }
  }
  QiwContext ctx(std::move(target), std::move(proposal), std::span<const LatentPoint>{});
  ctx.rest_log_w_ = std::move(rest_log_w);
  ctx.log_rest_sum_ = rest_sum(ctx.rest_log_w_);
  return ctx;
}

QiwContext QiwContext::draw(TargetModel target, GaussianProposal proposal, std::size_t k, RngStream& rng) {
  require_k(k);
  require_compatible(target, proposal);
  std::vector<LatentPoint> rest;
  rest.reserve(k - 1);
  for (std::size_t i = 1; i < k; ++i) rest.push_back(proposal_sample(proposal, rng));
  return QiwContext(std::move(target), std::move(proposal), rest);
}

double qiw_log_from_parts(double log_p, double log_q, double log_rest_sum, std::size_t k) noexcept {
  if (k == 1) return log_q;
  if (log_p == kNegInf) return kNegInf;
  const double log_denominator = log_add_exp(log_p - log_q, log_rest_sum) - std::log(static_cast<double>(k));
  return log_p - log_denominator;
}

double qiw_log_density(const QiwContext& ctx, const LatentPoint& z) {
  const double lp = target_log_density(ctx.target(), z);
  const double lq = proposal_log_density(ctx.proposal(), z);
  return qiw_log_from_parts(lp, lq, ctx.log_rest_sum(), ctx.k());
}

double qiw_unnorm_density(const QiwContext& ctx, const LatentPoint& z) { return std::exp(qiw_log_density(ctx, z)); }

double draw_log_rest_sum(const TargetModel& t, const GaussianProposal& q, std::size_t k, RngStream& rng) {
  double acc = kNegInf;
  for (std::size_t i = 1; i < k; ++i) {
    const LatentPoint z = proposal_sample(q, rng);
    acc = log_add_exp(acc, log_weight(t, q, z));
  }
  return acc;
}

double qew_density_mc(const TargetModel& t, const GaussianProposal& q, const LatentPoint& z, std::size_t k,
                      std::size_t S, RngStream& rng) {
  require_k(k);
  require_compatible(t, q);
  if (S == 0) throw ArgumentError("qew_density_mc needs S >= 1");
  const double lq = proposal_log_density(q, z);
  if (k == 1) return std::exp(lq);
  const double lp = target_log_density(t, z);
  const auto terms = replicate<double>(S, rng, [&](RngStream& stream) {
    return std::exp(qiw_log_from_parts(lp, lq, draw_log_rest_sum(t, q, k, stream), k));
  });
  double acc = 0.0;
  for (double v : terms) acc += v;
  return acc / static_cast<double>(S);
}

std::size_t sir_select(std::span<const double> probabilities, double u) {
  if (probabilities.empty()) throw ArgumentError("cannot select from an empty weight vector");
  double cumulative = 0.0;
  std::size_t last_positive = probabilities.size();
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    if (probabilities[i] <= 0.0) continue;
    cumulative += probabilities[i];
    last_positive = i;
    if (cumulative >= u) return i;
  }
  if (last_positive == probabilities.size()) throw NumericError("cannot select: every weight is zero");
  // Rounding left the total just below u.
  return last_positive;
}

LatentPoint sir_sample(const TargetModel& t, const GaussianProposal& q, std::size_t k, RngStream& rng) {
  require_k(k);
  WeightBatch batch = draw_weight_batch(t, q, k, rng);
  const auto probabilities = normalize_weights(batch.log_w);
  const double u = 1.0 - rng.uniform();
  return std::move(batch.points[sir_select(probabilities, u)]);
}

std::vector<LatentPoint> sir_samples(const TargetModel& t, const GaussianProposal& q, std::size_t k,
                                     std::size_t n, RngStream& rng) {
  require_k(k);
  require_compatible(t, q);
  return replicate<LatentPoint>(n, rng, [&](RngStream& stream) { return sir_sample(t, q, k, stream); });
}

CellLogDensities evaluate_cells(const TargetModel& t, const GaussianProposal& q, const Grid& grid) {
  require_compatible(t, q);
  if (grid.dim() != t.dim()) throw ArgumentError("grid and model dimensions differ");
  CellLogDensities cells;
  cells.log_p.resize(grid.size());
  cells.log_q.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const LatentPoint z = grid.cell_center(i);
      cells.log_p[i] = target_log_density(t, z);
      cells.log_q[i] = proposal_log_density_unchecked(q, z);
      if (std::isnan(cells.log_p[i] - cells.log_q[i])) throw NumericError("undefined log weight on the grid");
    }
  });
  return cells;
}

DensityField qiw_field(const QiwContext& ctx, const Grid& grid) {
  const auto cells = evaluate_cells(ctx.target(), ctx.proposal(), grid);
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::exp(qiw_log_from_parts(cells.log_p[i], cells.log_q[i], ctx.log_rest_sum(), ctx.k()));
  }
  return DensityField(grid, std::move(values));
}

QewRender render_qew(const TargetModel& t, const GaussianProposal& q, std::size_t k, std::size_t S,
                     const Grid& grid, RngStream& rng, std::size_t groups) {
  require_k(k);
  if (S == 0) throw ArgumentError("grid rendering needs S >= 1");
  if (groups == 0 || groups > S) throw ArgumentError("group count must be in [1, S]");
  const auto cells = evaluate_cells(t, q, grid);
  const std::size_t n_cells = grid.size();

  std::vector<std::size_t> group_of(S);
  std::vector<std::size_t> group_sizes(groups, 0);
  for (std::size_t s = 0; s < S; ++s) {
    group_of[s] = s * groups / S;
    ++group_sizes[group_of[s]];
  }
  std::vector<std::vector<double>> group_sums(groups, std::vector<double>(n_cells, 0.0));

  if (k == 1) {
    for (std::size_t i = 0; i < n_cells; ++i) {
      const double v = std::exp(cells.log_q[i]);
      for (std::size_t g = 0; g < groups; ++g) group_sums[g][i] = v * static_cast<double>(group_sizes[g]);
    }
    std::vector<double> values(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) values[i] = std::exp(cells.log_q[i]);
    return {DensityField(grid, std::move(values)), std::move(group_sums), std::move(group_sizes)};
  }

  // One conditioning batch per outer iteration, shared by every location.
  std::vector<double> total(n_cells, 0.0);
  const auto log_p_hat = replicate<double>(S, rng, [&](RngStream& stream) { return draw_log_rest_sum(t, q, k, stream); });

  parallel_for(n_cells, [&](std::size_t b, std::size_t e) {
    for (std::size_t s = 0; s < S; ++s) {
      auto& group = group_sums[group_of[s]];
      for (std::size_t i = b; i < e; ++i) {
        const double term = std::exp(qiw_log_from_parts(cells.log_p[i], cells.log_q[i], log_p_hat[s], k));
        total[i] += term;
        group[i] += term;
      }
    }
  });

  for (double& v : total) v /= static_cast<double>(S);
  return {DensityField(grid, std::move(total)), std::move(group_sums), std::move(group_sizes)};
}

DensityField plot_qew_grid(const TargetModel& t, const GaussianProposal& q, std::size_t k, std::size_t S,
                           const Grid& grid, RngStream& rng) {
  return render_qew(t, q, k, S, grid, rng, 1).field;
}

}  // namespace iwpost
