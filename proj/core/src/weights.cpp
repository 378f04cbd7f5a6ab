#include "iwpost/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "iwpost/error.hpp"

namespace iwpost {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double max_of(std::span<const double> values) {
  double hi = kNegInf;
  for (double v : values) {
    if (std::isnan(v)) throw NumericError("NaN log weight");
    hi = std::max(hi, v);
  }
  return hi;
}

}  // namespace

double log_weight(const TargetModel& t, const GaussianProposal& q, const LatentPoint& z) {
  if (t.dim() != q.dim()) throw ArgumentError("target and proposal dimensions differ");
  const double lp = target_log_density(t, z);
  const double lq = proposal_log_density(q, z);
  const double lw = lp - lq;
  if (std::isnan(lw)) throw NumericError("undefined log weight (both densities are zero)");
  return lw;
}

WeightBatch draw_weight_batch(const TargetModel& t, const GaussianProposal& q, std::size_t k, RngStream& rng) {
  if (k == 0) throw ArgumentError("batch size must be at least 1");
  WeightBatch batch;
  batch.points.reserve(k);
  batch.log_w.reserve(k);
  bool any_finite = false;
  for (std::size_t i = 0; i < k; ++i) {
    batch.points.push_back(proposal_sample(q, rng));
    batch.log_w.push_back(log_weight(t, q, batch.points.back()));
    any_finite = any_finite || std::isfinite(batch.log_w.back());
  }
  if (!any_finite) throw NumericError("every importance weight in the batch is zero");
  return batch;
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw ArgumentError("log_sum_exp of an empty list");
  const double hi = max_of(values);
  if (hi == kNegInf) return kNegInf;
  if (hi == std::numeric_limits<double>::infinity()) return hi;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

double log_mean_exp(std::span<const double> values) {
  if (values.empty()) throw ArgumentError("log_mean_exp of an empty list");
  const double hi = max_of(values);
  if (hi == kNegInf || hi == std::numeric_limits<double>::infinity()) return hi;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - hi);
  return hi + std::log(acc / static_cast<double>(values.size()));
}

double log_add_exp(double a, double b) noexcept {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

std::vector<double> normalize_weights(std::span<const double> log_w) {
  if (log_w.empty()) throw ArgumentError("normalize_weights of an empty list");
  const double hi = max_of(log_w);
  if (hi == kNegInf) throw NumericError("cannot normalize: every weight is zero");
  if (hi == std::numeric_limits<double>::infinity()) throw NumericError("cannot normalize: infinite weight");
  std::vector<double> w(log_w.size());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(log_w[i] - hi);
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

}  // namespace iwpost
