#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "iwpost/error.hpp"
#include "iwpost/weights.hpp"
#include "test_support.hpp"

using namespace iwpost;
using iwpost::testing::point;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("log_weight examples") {
  const auto std_normal = iwpost::testing::normal_target_1d(0.0, 1.0);
  const auto q = GaussianProposal::isotropic(1);
  for (double z : {-2.0, 0.0, 0.3, 4.0}) CHECK(std::abs(log_weight(std_normal, q, point({z}))) < 1e-15);

  const auto gauss1d = builtin_target("gauss1d");
  for (double z : {-3.0, 0.0, 1.7}) {
    CHECK(log_weight(gauss1d, q, point({z})) == doctest::Approx(0.91893853320467274178).epsilon(1e-15));
  }
  // 0.5 log(2 pi) + ((z - 0.5)^2 - z^2) / 2 at z = 1.
  const auto shifted = GaussianProposal::isotropic(1, 0.5);
  CHECK(log_weight(gauss1d, shifted, point({1.0})) == doctest::Approx(0.54393853320467274178).epsilon(1e-15));
}

TEST_CASE("log_weight rejects -inf minus -inf") {
  const TargetModel empty("empty", 1, [](const LatentPoint&) { return -kInf; });
  const GaussianProposal needle(point({0.0}), point({-400.0}));
  CHECK_THROWS_AS(log_weight(empty, needle, point({1.0})), NumericError);
  CHECK(log_weight(empty, GaussianProposal::isotropic(1), point({1.0})) == -kInf);
}

TEST_CASE("draw_weight_batch stores exact log weights") {
  const auto t = builtin_target("mix2");
  const auto q = GaussianProposal::isotropic(2, 0.2, -0.1);
  RngStream rng(11);
  const auto batch = draw_weight_batch(t, q, 7, rng);
  REQUIRE(batch.size() == 7);
  REQUIRE(batch.points.size() == 7);
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK(batch.log_w[i] == target_log_density(t, batch.points[i]) - proposal_log_density(q, batch.points[i]));
  }
  const TargetModel empty("empty", 2, [](const LatentPoint&) { return -kInf; });
  CHECK_THROWS_AS(draw_weight_batch(empty, q, 3, rng), NumericError);
}

TEST_CASE("log_mean_exp examples") {
  const std::vector<double> constant{1.25, 1.25, 1.25};
  CHECK(log_mean_exp(constant) == doctest::Approx(1.25).epsilon(1e-15));
  const std::vector<double> one_three{0.0, std::log(3.0)};
  CHECK(log_mean_exp(one_three) == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  const std::vector<double> v{0.0, 1.0, 2.5, -3.0};
  std::vector<double> shifted = v;
  for (double& x : shifted) x += 1000.0;
  CHECK(std::isfinite(log_mean_exp(shifted)));
  CHECK(log_mean_exp(shifted) == doctest::Approx(log_mean_exp(v) + 1000.0).epsilon(1e-15));

  const std::vector<double> dead{-kInf, -kInf};
  CHECK(log_mean_exp(dead) == -kInf);
  const std::vector<double> partial{-kInf, 0.0};
  CHECK(log_mean_exp(partial) == doctest::Approx(std::log(0.5)));
  CHECK_THROWS_AS(log_mean_exp(std::vector<double>{}), ArgumentError);
}

TEST_CASE("normalize_weights examples") {
  CHECK(normalize_weights(std::vector<double>{0.0, 0.0}) == std::vector<double>{0.5, 0.5});
  const auto w = normalize_weights(std::vector<double>{0.0, std::log(3.0)});
  CHECK(w[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(w[1] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(normalize_weights(std::vector<double>{0.0, -kInf}) == std::vector<double>{1.0, 0.0});
  CHECK_THROWS_AS(normalize_weights(std::vector<double>{-kInf, -kInf}), NumericError);
}

TEST_CASE("log-space weight arithmetic properties on random inputs") {
  RngStream rng(31337);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 40.0);
    const double scale = std::pow(10.0, 2.0 * rng.uniform());  // spreads up to 100 nats
    std::vector<double> v(n);
    for (double& x : v) x = scale * rng.normal();
    const double lme = log_mean_exp(v);
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    CHECK(lme >= *lo - 1e-12);
    CHECK(lme <= *hi + 1e-12);

    // Direct evaluation after shifting so no element exceeds 700.
    const double shift = *hi - 700.0 > 0.0 ? *hi - 700.0 : 0.0;
    double mean = 0.0;
    for (double x : v) mean += std::exp(x - shift);
    mean /= static_cast<double>(n);
    CHECK(std::exp(lme - shift) == doctest::Approx(mean).epsilon(1e-12));

    const auto w = normalize_weights(v);
    CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    const double c = 50.0 * rng.normal();
    std::vector<double> moved = v;
    for (double& x : moved) x += c;
    const auto w2 = normalize_weights(moved);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(w[i] - w2[i]) < 1e-12);
  }
}

TEST_CASE("log_add_exp") {
  CHECK(log_add_exp(0.0, 0.0) == doctest::Approx(std::log(2.0)));
  CHECK(log_add_exp(-kInf, 3.0) == 3.0);
  CHECK(log_add_exp(-kInf, -kInf) == -kInf);
  CHECK(log_add_exp(1000.0, 1000.0) == doctest::Approx(1000.0 + std::log(2.0)));
}
