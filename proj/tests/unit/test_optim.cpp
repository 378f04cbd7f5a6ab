#include <cmath>
#include <vector>

#include "doctest.h"
#include "iwpost/bounds.hpp"
#include "iwpost/error.hpp"
#include "iwpost/optim.hpp"
#include "iwpost/stats.hpp"
#include "test_support.hpp"

using namespace iwpost;
using iwpost::testing::point;

namespace {

GaussianProposal moved(const GaussianProposal& q, const Vector& direction, double h) {
  const auto d = static_cast<Eigen::Index>(q.dim());
  return GaussianProposal(q.mean() + h * direction.head(d), q.log_std() + h * direction.tail(d));
}

// Common-random-number central difference of the k-sample bound estimator along `direction`.
double crn_directional_derivative(const TargetModel& t, const GaussianProposal& q, std::size_t k, std::size_t n,
                                  const Vector& direction, std::uint64_t seed, double h) {
  RngStream up_rng(seed), down_rng(seed);
  const double up = iwae_elbo_mc(t, moved(q, direction, h), k, n, up_rng).value;
  const double down = iwae_elbo_mc(t, moved(q, direction, -h), k, n, down_rng).value;
  return (up - down) / (2.0 * h);
}

}  // namespace

TEST_CASE("reparam_sample") {
  const auto q = GaussianProposal::isotropic(2, 0.7, 0.4);
  CHECK(reparam_sample(q, Vector::Zero(2)) == q.mean());
  CHECK(reparam_sample(GaussianProposal::isotropic(1, 0.5), point({1.0}))[0] == 1.5);
  CHECK_THROWS_AS(reparam_sample(q, Vector::Zero(3)), ArgumentError);

  const GaussianProposal q1(point({-0.3}), point({0.25}));
  RngStream a(1), b(2);
  std::vector<double> via_reparam, via_sample;
  for (int i = 0; i < 100000; ++i) {
    via_reparam.push_back(reparam_sample(q1, standard_normal(1, a))[0]);
    via_sample.push_back(proposal_sample(q1, b)[0]);
  }
  CHECK(ks_two_sample(via_reparam, via_sample) < 0.01);
}

TEST_CASE("iwae_gradient with constant weights is zero in expectation") {
  RngStream rng(4);
  for (std::size_t k : {1, 5}) {
    const auto est = iwae_gradient(builtin_target("gauss1d"), GaussianProposal::isotropic(1), k, 20000, rng);
    CHECK(std::abs(est.gradient.mean[0]) < 3.0 * est.std_error.mean[0]);
    CHECK(std::abs(est.gradient.log_std[0]) < 3.0 * est.std_error.log_std[0]);
    CHECK(est.bound == doctest::Approx(iwpost::testing::kHalfLog2Pi).epsilon(1e-12));
  }
}

TEST_CASE("iwae_gradient matches the analytic KL gradient at k = 1") {
  RngStream rng(8);
  const auto est = iwae_gradient(builtin_target("gauss1d"), GaussianProposal::isotropic(1, 0.5), 1, 100000, rng);
  CHECK(std::abs(est.gradient.mean[0] + 0.5) < 3.0 * est.std_error.mean[0]);
  CHECK(std::abs(est.gradient.log_std[0]) < 3.0 * est.std_error.log_std[0]);  // 1 - sigma^2 at sigma = 1
}

TEST_CASE("iwae_gradient matches common-random-number finite differences") {
  RngStream rng(2024);
  const std::vector<std::string> names{"mix2", "ring", "gauss2d", "gauss1d"};
  for (int config = 0; config < 20; ++config) {
    const auto t = builtin_target(names[static_cast<std::size_t>(config) % names.size()]);
    const GaussianProposal q(0.8 * standard_normal(t.dim(), rng), 0.3 * standard_normal(t.dim(), rng));
    const std::size_t k = 1 + static_cast<std::size_t>(rng.uniform() * 10.0);
    Vector direction = standard_normal(2 * t.dim(), rng);
    direction.normalize();
    const std::uint64_t seed = rng.next_u64();

    RngStream grad_rng(seed);
    const auto est = iwae_gradient(t, q, k, 10000, grad_rng);
    const double analytic = est.gradient.packed().dot(direction);
    const double numeric = crn_directional_derivative(t, q, k, 10000, direction, seed, 1e-4);
    INFO(t.name(), " k=", k, " analytic=", analytic, " numeric=", numeric);
    CHECK(iwpost::testing::relative_error(analytic, numeric, 1e-8) < 1e-3);
  }
}

TEST_CASE("iwae_gradient needs an analytic gradient") {
  const TargetModel plain("plain", 1, [](const LatentPoint& z) { return -z[0] * z[0]; });
  RngStream rng(1);
  CHECK_THROWS_AS(iwae_gradient(plain, GaussianProposal::isotropic(1), 2, 10, rng), CapabilityError);
}

TEST_CASE("fit_proposal recovers a Gaussian posterior") {
  const auto t = builtin_target("gauss1d");
  const GaussianProposal q0(point({2.0}), point({1.0}));
  // The k-sample bound flattens in the proposal parameters roughly like 1/k near the
  // posterior, so k = 10 needs a 10x step to cover the same ground in 2000 steps.
  for (const auto& [k, lr] : {std::pair<std::size_t, double>{1, 0.01}, {10, 0.1}}) {
    RngStream rng(100 + k);
    const auto fit = fit_proposal(t, q0, k, FitOptions{2000, lr, 100}, rng);
    INFO("k=", k, " mean=", fit.proposal.mean()[0], " std=", fit.proposal.std_dev()[0]);
    CHECK_FALSE(fit.diverged);
    CHECK(fit.trace.size() == 2000);
    CHECK(std::abs(fit.proposal.mean()[0]) < 0.05);
    CHECK(std::abs(fit.proposal.std_dev()[0] - 1.0) < 0.05);

    RngStream eval(7);
    const auto bound = iwae_elbo_mc(t, fit.proposal, 1, 100000, eval);
    CHECK(std::abs(bound.value - iwpost::testing::kHalfLog2Pi) < 0.01);

    // 100-step window means of the traced bound never drop by more than their noise.
    std::vector<MeanStdError> windows;
    for (std::size_t w = 0; w + 100 <= fit.trace.size(); w += 100) {
      std::vector<double> values;
      for (std::size_t i = w; i < w + 100; ++i) values.push_back(fit.trace[i].bound);
      windows.push_back(mean_std_error(values));
    }
    for (std::size_t i = 1; i < windows.size(); ++i) {
      const double noise = std::hypot(windows[i].std_error, windows[i - 1].std_error);
      CHECK(windows[i].mean >= windows[i - 1].mean - 3.0 * noise);
    }
  }
}

TEST_CASE("fit_proposal is deterministic given the seed") {
  const auto t = builtin_target("mix2");
  const auto q0 = GaussianProposal::isotropic(2, 0.2, 0.3);
  RngStream a(5), b(5);
  const auto first = fit_proposal(t, q0, 3, FitOptions{50, 0.05, 16}, a);
  const auto second = fit_proposal(t, q0, 3, FitOptions{50, 0.05, 16}, b);
  CHECK(trace_to_csv(first.trace) == trace_to_csv(second.trace));
  const auto csv = trace_to_csv(first.trace);
  CHECK(csv.substr(0, csv.find('\n')) == "step,bound,mean_0,mean_1,log_std_0,log_std_1,grad_norm");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 51);
}

TEST_CASE("training with more samples gives a better k = 50 bound on mix2") {
  const auto t = builtin_target("mix2");
  const auto q0 = GaussianProposal::isotropic(2);
  RngStream rng(31);
  const auto vae_fit = fit_proposal(t, q0, 1, FitOptions{1000, 0.02, 20}, rng);
  const auto iwae_fit = fit_proposal(t, q0, 50, FitOptions{1000, 0.02, 20}, rng);
  const auto vae_eval = iwae_elbo_mc(t, vae_fit.proposal, 50, 20000, rng);
  const auto iwae_eval = iwae_elbo_mc(t, iwae_fit.proposal, 50, 20000, rng);
  INFO("k=1 trained: ", vae_eval.value, "  k=50 trained: ", iwae_eval.value);
  CHECK(iwae_eval.value >= vae_eval.value - 3.0 * std::hypot(vae_eval.std_error, iwae_eval.std_error));
}

TEST_CASE("fit_proposal stops on divergence with the trace intact") {
  const TargetModel explosive(
      "explosive", 1, [](const LatentPoint& z) { return std::pow(z[0], 4); },
      [](const LatentPoint& z) -> Vector { return Vector::Constant(1, 4.0 * std::pow(z[0], 3)); });
  RngStream rng(3);
  const auto fit = fit_proposal(explosive, GaussianProposal::isotropic(1, 1.0), 1, FitOptions{500, 1.0, 4}, rng);
  CHECK(fit.diverged);
  CHECK(fit.trace.size() < 500);
  for (const auto& row : fit.trace) CHECK(std::isfinite(row.bound));
}
