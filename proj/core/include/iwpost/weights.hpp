#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "iwpost/model.hpp"
#include "iwpost/rng.hpp"

namespace iwpost {

/// k latent draws with their log importance weights log p(x, z_i) - log q(z_i | x).
struct WeightBatch {
  std::vector<LatentPoint> points;
  std::vector<double> log_w;

  std::size_t size() const noexcept { return log_w.size(); }
};

/// log p(x, z) - log q(z | x). -inf is legal (zero target density); -inf - (-inf) is a NumericError.
double log_weight(const TargetModel& t, const GaussianProposal& q, const LatentPoint& z);

/// Draws k points from q and weighs them. Throws NumericError if every weight is zero.
WeightBatch draw_weight_batch(const TargetModel& t, const GaussianProposal& q, std::size_t k, RngStream& rng);

/// log((1/k) sum exp(v_i)), shifted by the maximum. -inf iff every input is -inf.
double log_mean_exp(std::span<const double> values);

/// log(sum exp(v_i)), shifted by the maximum.
double log_sum_exp(std::span<const double> values);

/// log(exp(a) + exp(b)) without overflow; handles -inf operands.
double log_add_exp(double a, double b) noexcept;

/// Max-shift softmax. Entries of -inf map to exactly 0. Throws NumericError if all are -inf.
std::vector<double> normalize_weights(std::span<const double> log_w);

}  // namespace iwpost
