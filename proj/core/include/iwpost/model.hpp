#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iwpost/rng.hpp"

namespace iwpost {

using Vector = Eigen::VectorXd;

/// A location in latent space. Its length must equal the model dimension.
using LatentPoint = Vector;

/// An unnormalized log-density over latent space: log p(x, z) with the
/// observation held fixed. Zero density is negative infinity, never NaN.
///
/// Immutable after construction; copies share the underlying callables.
class TargetModel {
 public:
  using LogDensityFn = std::function<double(const LatentPoint&)>;
  using GradientFn = std::function<Vector(const LatentPoint&)>;

  TargetModel(std::string name, std::size_t dim, LogDensityFn log_density, GradientFn log_grad = {},
              std::optional<double> known_log_z = std::nullopt);

  const std::string& name() const noexcept { return name_; }
  std::size_t dim() const noexcept { return dim_; }
  bool has_gradient() const noexcept { return static_cast<bool>(log_grad_); }
  std::optional<double> known_log_z() const noexcept { return known_log_z_; }

  /// Unchecked evaluation for hot loops; callers guarantee the dimension.
  double log_density_unchecked(const LatentPoint& z) const { return log_density_(z); }

  /// Throws CapabilityError when no analytic gradient was supplied.
  Vector log_gradient(const LatentPoint& z) const;

 private:
  std::string name_;
  std::size_t dim_;
  LogDensityFn log_density_;
  GradientFn log_grad_;
  std::optional<double> known_log_z_;
};

/// Diagonal Gaussian q(z|x) parameterized by mean and per-dimension log standard deviation.
class GaussianProposal {
 public:
  GaussianProposal(Vector mean, Vector log_std);

  /// N(mean, exp(log_std)^2 I) in `dim` dimensions with the same scalars in every coordinate.
  static GaussianProposal isotropic(std::size_t dim, double mean = 0.0, double log_std = 0.0);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(mean_.size()); }
  const Vector& mean() const noexcept { return mean_; }
  const Vector& log_std() const noexcept { return log_std_; }
  Vector std_dev() const { return log_std_.array().exp().matrix(); }

  /// mean + exp(log_std) * eps, elementwise.
  LatentPoint transform(const Vector& eps) const;

 private:
  Vector mean_;
  Vector log_std_;
};

/// log p(x, z). Throws ArgumentError on dimension mismatch and NumericError on NaN.
double target_log_density(const TargetModel& t, const LatentPoint& z);

/// Exact diagonal-Gaussian log-density.
double proposal_log_density(const GaussianProposal& q, const LatentPoint& z);

/// Unchecked variant for hot loops.
double proposal_log_density_unchecked(const GaussianProposal& q, const LatentPoint& z);

/// Draws a standard-normal vector and pushes it through q.transform. The number and
/// order of normal draws (one per dimension) is fixed so reparameterized estimators
/// see identical noise for the same stream.
LatentPoint proposal_sample(const GaussianProposal& q, RngStream& rng);
Vector standard_normal(std::size_t dim, RngStream& rng);

// ---------------------------------------------------------------------------
// Parametric target families used by the builtins and by config files.

/// One weighted isotropic Gaussian component: exp(log_weight) * N(z; mean, std^2 I).
struct MixtureComponent {
  double log_weight = 0.0;
  Vector mean;
  double std = 1.0;
};

struct TargetSpec {
  enum class Family { mixture, ring };

  std::string name;
  std::size_t dim = 0;
  Family family = Family::mixture;
  std::vector<MixtureComponent> components;  // mixture
  double radius = 2.0;                       // ring: exp(-(|z| - radius)^2 / (2 width^2))
  double width = 0.3;
};

/// Validates the description and builds the model with its analytic gradient. Mixtures
/// carry known_log_z = log(sum of weights); rings carry none.
TargetModel make_target(const TargetSpec& spec);

/// gauss1d, gauss2d, mix2 or ring. Throws ArgumentError for anything else.
TargetSpec builtin_target_spec(std::string_view name);
TargetModel builtin_target(std::string_view name);

std::vector<std::string> builtin_target_names();

}  // namespace iwpost
