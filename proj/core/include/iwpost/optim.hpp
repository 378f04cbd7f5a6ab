#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "iwpost/model.hpp"
#include "iwpost/rng.hpp"

namespace iwpost {

/// mean + exp(log_std) * eps. The map is differentiable in (mean, log_std), which is
/// what lets iwae_gradient differentiate through the draws.
LatentPoint reparam_sample(const GaussianProposal& q, const Vector& eps);

/// A direction in (mean, log_std) parameter space.
struct ProposalGradient {
  Vector mean;
  Vector log_std;

  double norm() const { return std::sqrt(mean.squaredNorm() + log_std.squaredNorm()); }
  /// Packed as [mean..., log_std...].
  Vector packed() const;
};

struct GradientEstimate {
  ProposalGradient gradient;   // mean over batches
  ProposalGradient std_error;  // per component, across batches
  double bound = 0.0;          // IWAE estimate from the same draws
  std::size_t n_batches = 0;
};

/// Pathwise gradient of the k-sample bound with respect to (mean, log_std).
///
/// With z_i = mean + sigma * eps_i and normalized weights w~_i, each batch contributes
///   d/d mean    = sum_i w~_i grad log p(z_i)
///   d/d log_std = sum_i w~_i grad log p(z_i) * sigma * eps_i + 1
/// (the +1 is the total derivative of -log q(z_i) along the reparameterized path).
/// Uses the same noise as iwae_elbo_mc for the same stream state, so common-random-number
/// finite differences of that estimator are a direct check.
/// Throws CapabilityError when the target has no analytic gradient.
GradientEstimate iwae_gradient(const TargetModel& t, const GaussianProposal& q, std::size_t k,
                               std::size_t n_batches, RngStream& rng);

struct FitOptions {
  std::size_t steps = 2000;
  double learning_rate = 0.01;
  std::size_t n_batches = 100;
};

struct FitStep {
  std::size_t step = 0;
  double bound = 0.0;
  Vector mean;
  Vector log_std;
  double grad_norm = 0.0;
};

struct FitResult {
  GaussianProposal proposal;
  std::vector<FitStep> trace;
  bool diverged = false;
};

/// Plain gradient ascent on the k-sample bound with a fixed step size. Each trace row
/// holds the parameters and bound estimate before that step's update. A non-finite bound
/// or parameter (or a NumericError from the estimator) stops the run with diverged = true
/// and the trace up to that point.
FitResult fit_proposal(const TargetModel& t, const GaussianProposal& q0, std::size_t k, const FitOptions& options,
                       RngStream& rng);

/// Header `step,bound,mean_0,...,log_std_0,...,grad_norm`, one row per step.
std::string trace_to_csv(const std::vector<FitStep>& trace);

}  // namespace iwpost
