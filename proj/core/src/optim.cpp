#include "iwpost/optim.hpp"

#include <fmt/format.h>

#include <cmath>

#include "iwpost/error.hpp"
#include "iwpost/parallel.hpp"
#include "iwpost/weights.hpp"

namespace iwpost {

LatentPoint reparam_sample(const GaussianProposal& q, const Vector& eps) { return q.transform(eps); }

Vector ProposalGradient::packed() const {
  Vector v(mean.size() + log_std.size());
  v << mean, log_std;
  return v;
}

GradientEstimate iwae_gradient(const TargetModel& t, const GaussianProposal& q, std::size_t k,
                               std::size_t n_batches, RngStream& rng) {
  if (!t.has_gradient()) throw CapabilityError("target '" + t.name() + "' has no analytic gradient");
  if (t.dim() != q.dim()) throw ArgumentError("target and proposal dimensions differ");
  if (k == 0) throw ArgumentError("k must be at least 1");
  if (n_batches < 2) throw ArgumentError("need at least two batches");

  const auto dim = static_cast<Eigen::Index>(q.dim());
  const Vector sigma = q.std_dev();

  // Per batch: [d mean (dim), d log_std (dim), bound].
  const auto per_batch = replicate<Vector>(n_batches, rng, [&](RngStream& stream) {
    std::vector<Vector> eps(k);
    std::vector<LatentPoint> z(k);
    std::vector<double> log_w(k);
    for (std::size_t i = 0; i < k; ++i) {
      eps[i] = standard_normal(q.dim(), stream);
      z[i] = reparam_sample(q, eps[i]);
      log_w[i] = log_weight(t, q, z[i]);
    }
    const auto w = normalize_weights(log_w);
    Vector out = Vector::Zero(2 * dim + 1);
    for (std::size_t i = 0; i < k; ++i) {
      if (w[i] == 0.0) continue;
      const Vector g = t.log_gradient(z[i]);
      out.head(dim) += w[i] * g;
      out.segment(dim, dim) += w[i] * (g.array() * sigma.array() * eps[i].array()).matrix();
    }
    out.segment(dim, dim).array() += 1.0;
    out[2 * dim] = log_mean_exp(log_w);
    return out;
  });

  const double n = static_cast<double>(n_batches);
  Vector sum = Vector::Zero(2 * dim + 1);
  for (const auto& v : per_batch) sum += v;
  const Vector mean = sum / n;
  Vector ss = Vector::Zero(2 * dim + 1);
  for (const auto& v : per_batch) ss += (v - mean).array().square().matrix();
  const Vector se = (ss / (n - 1.0) / n).array().sqrt().matrix();

  GradientEstimate est;
  est.gradient = {mean.head(dim), mean.segment(dim, dim)};
  est.std_error = {se.head(dim), se.segment(dim, dim)};
  est.bound = mean[2 * dim];
  est.n_batches = n_batches;
  return est;
}

FitResult fit_proposal(const TargetModel& t, const GaussianProposal& q0, std::size_t k, const FitOptions& options,
                       RngStream& rng) {
  if (options.steps == 0) throw ArgumentError("fit needs at least one step");
  if (!(options.learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
  FitResult result{q0, {}, false};
  result.trace.reserve(options.steps);
  for (std::size_t step = 0; step < options.steps; ++step) {
    const GaussianProposal& q = result.proposal;
    GradientEstimate est;
    try {
      est = iwae_gradient(t, q, k, options.n_batches, rng);
    } catch (const NumericError&) {
      result.diverged = true;
      break;
    }
    const double grad_norm = est.gradient.norm();
    if (!std::isfinite(est.bound) || !std::isfinite(grad_norm)) {
      result.diverged = true;
      break;
    }
    result.trace.push_back({step, est.bound, q.mean(), q.log_std(), grad_norm});
    Vector mean = q.mean() + options.learning_rate * est.gradient.mean;
    Vector log_std = q.log_std() + options.learning_rate * est.gradient.log_std;
    if (!mean.allFinite() || !log_std.allFinite()) {
      result.diverged = true;
      break;
    }
    result.proposal = GaussianProposal(std::move(mean), std::move(log_std));
  }
  return result;
}

std::string trace_to_csv(const std::vector<FitStep>& trace) {
  const std::size_t dim = trace.empty() ? 0 : static_cast<std::size_t>(trace.front().mean.size());
  std::string out = "step,bound";
  for (std::size_t d = 0; d < dim; ++d) out += fmt::format(",mean_{}", d);
  for (std::size_t d = 0; d < dim; ++d) out += fmt::format(",log_std_{}", d);
  out += ",grad_norm\n";
  for (const auto& row : trace) {
    out += fmt::format("{},{:.17g}", row.step, row.bound);
    for (Eigen::Index d = 0; d < row.mean.size(); ++d) out += fmt::format(",{:.17g}", row.mean[d]);
    for (Eigen::Index d = 0; d < row.log_std.size(); ++d) out += fmt::format(",{:.17g}", row.log_std[d]);
    out += fmt::format(",{:.17g}\n", row.grad_norm);
  }
  return out;
}

}  // namespace iwpost
