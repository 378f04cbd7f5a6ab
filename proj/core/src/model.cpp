#include "iwpost/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "iwpost/error.hpp"

namespace iwpost {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;  // log(2 pi)

void require_dim(std::size_t expected, const LatentPoint& z, const char* what) {
  if (static_cast<std::size_t>(z.size()) != expected) {
    throw ArgumentError(std::string(what) + ": point has dimension " + std::to_string(z.size()) +
                        ", model has " + std::to_string(expected));
  }
}

// Precomputed per-component constants: log_coef = log w - d log s - d/2 log(2 pi).
struct PreparedMixture {
  std::vector<double> log_coef;
  std::vector<Vector> means;
  std::vector<double> inv_var;
};

PreparedMixture prepare(const TargetSpec& spec) {
  PreparedMixture m;
  const double d = static_cast<double>(spec.dim);
  for (const auto& c : spec.components) {
    m.log_coef.push_back(c.log_weight - d * std::log(c.std) - 0.5 * d * kLog2Pi);
    m.means.push_back(c.mean);
    m.inv_var.push_back(1.0 / (c.std * c.std));
  }
  return m;
}

double component_log(const PreparedMixture& m, std::size_t c, const LatentPoint& z) {
  return m.log_coef[c] - 0.5 * (z - m.means[c]).squaredNorm() * m.inv_var[c];
}

double mixture_log_density(const PreparedMixture& m, const LatentPoint& z) {
  const std::size_t n = m.log_coef.size();
  if (n == 1) return component_log(m, 0, z);
  double terms[16];
  std::vector<double> heap;
  double* v = terms;
  if (n > 16) {
    heap.resize(n);
    v = heap.data();
  }
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < n; ++c) {
    v[c] = component_log(m, c, z);
    hi = std::max(hi, v[c]);
  }
  if (hi == -std::numeric_limits<double>::infinity()) return hi;
  double acc = 0.0;
  for (std::size_t c = 0; c < n; ++c) acc += std::exp(v[c] - hi);
  return hi + std::log(acc);
}

Vector mixture_gradient(const PreparedMixture& m, const LatentPoint& z) {
  const std::size_t n = m.log_coef.size();
  std::vector<double> lc(n);
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < n; ++c) {
    lc[c] = component_log(m, c, z);
    hi = std::max(hi, lc[c]);
  }
  double total = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    lc[c] = std::exp(lc[c] - hi);
    total += lc[c];
  }
  Vector g = Vector::Zero(z.size());
  for (std::size_t c = 0; c < n; ++c) {
    g += (lc[c] / total) * m.inv_var[c] * (m.means[c] - z);
  }
  return g;
}

void validate(const TargetSpec& spec) {
  if (spec.dim == 0) throw ArgumentError("target '" + spec.name + "': dimension must be positive");
  switch (spec.family) {
    case TargetSpec::Family::mixture:
      if (spec.components.empty()) {
        throw ArgumentError("target '" + spec.name + "': mixture needs at least one component");
      }
      for (const auto& c : spec.components) {
        if (static_cast<std::size_t>(c.mean.size()) != spec.dim) {
          throw ArgumentError("target '" + spec.name + "': component mean has wrong dimension");
        }
        if (!(c.std > 0.0) || !std::isfinite(c.std)) {
          throw ArgumentError("target '" + spec.name + "': component std must be positive");
        }
        if (!std::isfinite(c.log_weight)) {
          throw ArgumentError("target '" + spec.name + "': component weight must be positive");
        }
      }
      break;
    case TargetSpec::Family::ring:
      if (spec.dim < 2) throw ArgumentError("target '" + spec.name + "': ring needs dim >= 2");
      if (!(spec.width > 0.0) || !(spec.radius >= 0.0)) {
        throw ArgumentError("target '" + spec.name + "': ring needs width > 0 and radius >= 0");
      }
      break;
  }
}

}  // namespace

TargetModel::TargetModel(std::string name, std::size_t dim, LogDensityFn log_density, GradientFn log_grad,
                         std::optional<double> known_log_z)
    : name_(std::move(name)),
      dim_(dim),
      log_density_(std::move(log_density)),
      log_grad_(std::move(log_grad)),
      known_log_z_(known_log_z) {
  if (dim_ == 0) throw ArgumentError("target dimension must be positive");
  if (!log_density_) throw ArgumentError("target '" + name_ + "' has no log-density function");
}

Vector TargetModel::log_gradient(const LatentPoint& z) const {
  if (!log_grad_) throw CapabilityError("target '" + name_ + "' has no analytic gradient");
  require_dim(dim_, z, "log_gradient");
  return log_grad_(z);
}

GaussianProposal::GaussianProposal(Vector mean, Vector log_std)
    : mean_(std::move(mean)), log_std_(std::move(log_std)) {
  if (mean_.size() == 0) throw ArgumentError("proposal dimension must be positive");
  if (mean_.size() != log_std_.size()) {
    throw ArgumentError("proposal mean and log_std have different lengths");
  }
  if (!mean_.allFinite() || !log_std_.allFinite()) {
    throw ArgumentError("proposal parameters must be finite");
  }
}

GaussianProposal GaussianProposal::isotropic(std::size_t dim, double mean, double log_std) {
  const auto n = static_cast<Eigen::Index>(dim);
  return GaussianProposal(Vector::Constant(n, mean), Vector::Constant(n, log_std));
}

LatentPoint GaussianProposal::transform(const Vector& eps) const {
  if (eps.size() != mean_.size()) throw ArgumentError("noise vector has wrong dimension");
  return mean_ + (log_std_.array().exp() * eps.array()).matrix();
}

double target_log_density(const TargetModel& t, const LatentPoint& z) {
  require_dim(t.dim(), z, "target_log_density");
  const double v = t.log_density_unchecked(z);
  if (std::isnan(v)) throw NumericError("target '" + t.name() + "' returned NaN");
  return v;
}

double proposal_log_density_unchecked(const GaussianProposal& q, const LatentPoint& z) {
  const auto& mu = q.mean();
  const auto& ls = q.log_std();
  double acc = 0.0;
  for (Eigen::Index d = 0; d < z.size(); ++d) {
    const double diff = z[d] - mu[d];
    acc += -0.5 * kLog2Pi - ls[d] - diff * diff / (2.0 * std::exp(2.0 * ls[d]));
  }
  return acc;
}

double proposal_log_density(const GaussianProposal& q, const LatentPoint& z) {
  require_dim(q.dim(), z, "proposal_log_density");
  return proposal_log_density_unchecked(q, z);
}

Vector standard_normal(std::size_t dim, RngStream& rng) {
  Vector eps(static_cast<Eigen::Index>(dim));
  for (Eigen::Index d = 0; d < eps.size(); ++d) eps[d] = rng.normal();
  return eps;
}

LatentPoint proposal_sample(const GaussianProposal& q, RngStream& rng) {
  return q.transform(standard_normal(q.dim(), rng));
}

TargetModel make_target(const TargetSpec& spec) {
  validate(spec);
  const std::size_t dim = spec.dim;
  if (spec.family == TargetSpec::Family::ring) {
    const double radius = spec.radius;
    const double inv_w2 = 1.0 / (spec.width * spec.width);
    auto log_density = [radius, inv_w2](const LatentPoint& z) {
      const double r = z.norm();
      return -0.5 * (r - radius) * (r - radius) * inv_w2;
    };
    auto grad = [radius, inv_w2](const LatentPoint& z) -> Vector {
      const double r = z.norm();
      if (r == 0.0) return Vector::Zero(z.size());
      return (-(r - radius) * inv_w2 / r) * z;
    };
    return TargetModel(spec.name, dim, log_density, grad);
  }

  auto prepared = std::make_shared<const PreparedMixture>(prepare(spec));
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& c : spec.components) hi = std::max(hi, c.log_weight);
  double acc = 0.0;
  for (const auto& c : spec.components) acc += std::exp(c.log_weight - hi);
  const double log_z = spec.components.size() == 1 ? spec.components.front().log_weight : hi + std::log(acc);

  return TargetModel(
      spec.name, dim, [prepared](const LatentPoint& z) { return mixture_log_density(*prepared, z); },
      [prepared](const LatentPoint& z) { return mixture_gradient(*prepared, z); }, log_z);
}

TargetSpec builtin_target_spec(std::string_view name) {
  TargetSpec spec;
  spec.name = std::string(name);
  if (name == "gauss1d" || name == "gauss2d") {
    // exp(-|z|^2 / 2): a standard normal scaled by (2 pi)^(d/2).
    spec.dim = name == "gauss1d" ? 1 : 2;
    const double d = static_cast<double>(spec.dim);
    spec.components.push_back({0.5 * d * kLog2Pi, Vector::Zero(static_cast<Eigen::Index>(spec.dim)), 1.0});
    return spec;
  }
  if (name == "mix2") {
    spec.dim = 2;
    spec.components.push_back({std::log(0.5), Vector::Constant(2, -1.5), 0.7});
    spec.components.push_back({std::log(0.5), Vector::Constant(2, 1.5), 0.7});
    return spec;
  }
  if (name == "ring") {
    spec.dim = 2;
    spec.family = TargetSpec::Family::ring;
    spec.radius = 2.0;
    spec.width = 0.3;
    return spec;
  }
  throw ArgumentError("unknown target '" + std::string(name) + "' (expected gauss1d, gauss2d, mix2 or ring)");
}

TargetModel builtin_target(std::string_view name) { return make_target(builtin_target_spec(name)); }

std::vector<std::string> builtin_target_names() { return {"gauss1d", "gauss2d", "mix2", "ring"}; }

}  // namespace iwpost
