#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "iwpost/error.hpp"
#include "iwpost/implicit.hpp"
#include "iwpost/oracle.hpp"
#include "iwpost/parallel.hpp"
#include "iwpost/stats.hpp"
#include "test_support.hpp"

using namespace iwpost;
using iwpost::testing::point;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Direct linear-space evaluation of the importance-weighted density, written against the
// formula rather than the library's log-space path.
double brute_force_qiw(const TargetModel& t, const GaussianProposal& q, const LatentPoint& z,
                       const std::vector<LatentPoint>& rest) {
  const double p = std::exp(target_log_density(t, z));
  const double k = static_cast<double>(rest.size() + 1);
  double sum = p / std::exp(proposal_log_density(q, z));
  for (const auto& zj : rest) sum += std::exp(target_log_density(t, zj)) / std::exp(proposal_log_density(q, zj));
  return p / (sum / k);
}

}  // namespace

TEST_CASE("qiw equals q at k = 1") {
  const auto t = builtin_target("mix2");
  const GaussianProposal q(point({0.3, -0.2}), point({0.1, -0.3}));
  const QiwContext ctx(t, q, std::vector<LatentPoint>{});
  CHECK(ctx.k() == 1);
  RngStream rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto z = 2.0 * standard_normal(2, rng);
    CHECK(qiw_unnorm_density(ctx, z) == std::exp(proposal_log_density(q, z)));
  }
}

TEST_CASE("qiw with constant weights is the normalized target") {
  const auto t = builtin_target("gauss1d");
  const auto q = GaussianProposal::isotropic(1);
  for (double z2 : {-1.3, 0.0, 2.2}) {
    const std::vector<LatentPoint> rest{point({z2})};
    const QiwContext ctx(t, q, rest);
    for (double z : {-2.0, 0.0, 0.7}) {
      const double normal = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
      CHECK(qiw_unnorm_density(ctx, point({z})) == doctest::Approx(normal).epsilon(1e-14));
    }
  }
}

TEST_CASE("qiw worked example: gauss1d, q = N(0.5, 1), k = 2, z = 0, z2 = 1") {
  // 1 / (0.5 (w(0) + w(1))) with w(0) = exp(1.0439385...), w(1) = exp(0.5439385...), 30-digit arithmetic.
  const std::vector<LatentPoint> rest{point({1.0})};
  const QiwContext ctx(builtin_target("gauss1d"), GaussianProposal::isotropic(1, 0.5), rest);
  CHECK(qiw_unnorm_density(ctx, point({0.0})) == doctest::Approx(0.438292695674136481755).epsilon(1e-14));
}

TEST_CASE("qiw matches brute-force evaluation on random configurations") {
  RngStream rng(77);
  for (const auto& name : {"mix2", "ring", "gauss2d"}) {
    const auto t = builtin_target(name);
    for (int trial = 0; trial < 20; ++trial) {
      const GaussianProposal q(0.5 * standard_normal(2, rng), 0.3 * standard_normal(2, rng));
      const std::size_t k = 2 + static_cast<std::size_t>(rng.uniform() * 8.0);
      std::vector<LatentPoint> rest;
      for (std::size_t j = 1; j < k; ++j) rest.push_back(proposal_sample(q, rng));
      const QiwContext ctx(t, q, rest);
      const auto z = 1.5 * standard_normal(2, rng);
      INFO(name, " trial ", trial);
      CHECK(qiw_unnorm_density(ctx, z) == doctest::Approx(brute_force_qiw(t, q, z, rest)).epsilon(1e-11));
    }
  }
}

TEST_CASE("qiw is zero where the target is zero") {
  const TargetModel half("half", 1, [](const LatentPoint& z) { return z[0] >= 0.0 ? -0.5 * z[0] * z[0] : -kInf; });
  const auto ctx = QiwContext::from_log_weights(half, GaussianProposal::isotropic(1), {0.1, -kInf});
  CHECK(qiw_unnorm_density(ctx, point({-1.0})) == 0.0);
  CHECK(qiw_unnorm_density(ctx, point({1.0})) > 0.0);
  CHECK_THROWS_AS(QiwContext::from_log_weights(half, GaussianProposal::isotropic(1), {std::nan("")}), ArgumentError);
}

TEST_CASE("qew_density_mc") {
  const auto q = GaussianProposal::isotropic(2, 0.1, 0.2);
  const auto z = point({0.4, -0.3});
  RngStream rng(8);
  CHECK(qew_density_mc(builtin_target("mix2"), q, z, 1, 17, rng) == std::exp(proposal_log_density(q, z)));

  const auto gauss = builtin_target("gauss1d");
  const auto q1 = GaussianProposal::isotropic(1);
  const double dq = std::exp(proposal_log_density(q1, point({0.6})));
  CHECK(qew_density_mc(gauss, q1, point({0.6}), 7, 25, rng) == doctest::Approx(dq).epsilon(1e-13));

  // With k = 100 and S = 2000 the estimate at a mode is within 5% of the posterior density there.
  const auto mix = builtin_target("mix2");
  const auto mode = point({1.5, 1.5});
  const double posterior = std::exp(target_log_density(mix, mode) - log_marginal(mix, Grid::default_for(2)));
  const double estimate = qew_density_mc(mix, GaussianProposal::isotropic(2), mode, 100, 2000, rng);
  CHECK(std::abs(estimate - posterior) / posterior < 0.05);
}

TEST_CASE("sir_select") {
  const std::vector<double> w{0.2, 0.0, 0.5, 0.3};
  CHECK(sir_select(w, 1e-300) == 0);
  CHECK(sir_select(w, 0.2) == 0);
  CHECK(sir_select(w, 0.2000001) == 2);
  CHECK(sir_select(w, 0.69) == 2);
  CHECK(sir_select(w, 0.71) == 3);
  CHECK(sir_select(w, 1.0) == 3);
  const std::vector<double> lead_zero{0.0, 1.0};
  CHECK(sir_select(lead_zero, 1e-300) == 1);
  const std::vector<double> only_first{1.0, 0.0};
  for (double u : {1e-12, 0.5, 1.0}) CHECK(sir_select(only_first, u) == 0);
  const std::vector<double> short_total{0.3, 0.3, 0.3999999999999999, 0.0};
  CHECK(sir_select(short_total, 1.0) == 2);
  CHECK_THROWS_AS(sir_select(std::vector<double>{0.0, 0.0}, 0.5), NumericError);
}

TEST_CASE("sir_sample") {
  SUBCASE("k = 1 returns the proposal draw") {
    const auto q = GaussianProposal::isotropic(2, 0.5, -0.3);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      RngStream a(seed), b(seed);
      CHECK(sir_sample(builtin_target("mix2"), q, 1, a) == proposal_sample(q, b));
    }
  }
  SUBCASE("zero-weight proposals are never returned") {
    const TargetModel half("half", 1, [](const LatentPoint& z) { return z[0] >= 0.0 ? -0.5 * z[0] * z[0] : -kInf; });
    RngStream rng(3);
    int all_zero = 0;
    for (int i = 0; i < 2000; ++i) {
      try {
        const auto z = sir_sample(half, GaussianProposal::isotropic(1), 4, rng);
        CHECK(z[0] >= 0.0);
      } catch (const NumericError&) {
        ++all_zero;  // every draw landed on z < 0, probability 1/16
      }
    }
    CHECK(all_zero > 60);
    CHECK(all_zero < 200);
  }
  SUBCASE("uniform weights reproduce q") {
    RngStream rng(10);
    const auto draws = sir_samples(builtin_target("gauss1d"), GaussianProposal::isotropic(1), 5, 100000, rng);
    std::vector<double> xs;
    for (const auto& z : draws) xs.push_back(z[0]);
    CHECK(ks_statistic(xs, normal_cdf) < 0.01);
  }
}

TEST_CASE("plot_qew_grid at k = 1 is the proposal field") {
  const auto grid = Grid::default_for(2);
  const GaussianProposal q(point({0.2, -0.4}), point({0.1, 0.3}));
  RngStream rng(5);
  const auto field = plot_qew_grid(builtin_target("ring"), q, 1, 40, grid, rng);
  CHECK(max_abs_error(field, proposal_field(q, grid)) < 1e-12);
}

TEST_CASE("plot_qew_grid with S = 1 is a single-batch qiw field") {
  const auto t = builtin_target("mix2");
  const auto q = GaussianProposal::isotropic(2);
  const auto grid = Grid::default_for(2);
  RngStream rng(21);
  RngStream copy = rng;
  const auto field = plot_qew_grid(t, q, 6, 1, grid, rng);
  RngStream batch_stream = RngStream::substream(copy.next_u64(), 0);
  const auto ctx = QiwContext::draw(t, q, 6, batch_stream);
  const auto expected = qiw_field(ctx, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(field[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  }
}

TEST_CASE("q_ew fields are normalized for mix2 and ring") {
  // A single batch's mass has sd around 0.5 on these targets, so the S = 500 mean
  // is checked against its own standard error rather than a fixed band.
  const auto grid = Grid::default_for(2);
  const auto q = GaussianProposal::isotropic(2);
  constexpr std::size_t kGroups = 50;
  RngStream rng(2718);
  for (const std::string name : {"mix2", "ring"}) {
    for (std::size_t k : {2, 3, 10}) {
      const auto render = render_qew(builtin_target(name), q, k, 500, grid, rng, kGroups);
      std::vector<double> group_mass;
      for (std::size_t g = 0; g < kGroups; ++g) {
        double sum = 0.0;
        for (double v : render.group_sums[g]) sum += v;
        group_mass.push_back(sum * grid.cell_volume() / static_cast<double>(render.group_sizes[g]));
      }
      const auto stats = mean_std_error(group_mass);
      const double mass = quadrature(render.field);
      INFO(name, " k=", k, " mass=", mass, " se=", stats.std_error);
      CHECK(mass == doctest::Approx(stats.mean).epsilon(1e-10));
      CHECK(stats.std_error < 0.05);
      CHECK(std::abs(mass - 1.0) < 4.0 * stats.std_error);
    }
  }
}

TEST_CASE("single-batch qiw mass varies but averages to one") {
  const auto t = builtin_target("mix2");
  const auto q = GaussianProposal::isotropic(2);
  const auto grid = Grid::default_for(2);
  const auto cells = evaluate_cells(t, q, grid);
  RngStream rng(99);
  const std::size_t k = 5;
  double total = 0.0, lo = kInf, hi = -kInf;
  for (int b = 0; b < 500; ++b) {
    const double log_rest = draw_log_rest_sum(t, q, k, rng);
    double mass = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) mass += std::exp(qiw_log_from_parts(cells.log_p[i], cells.log_q[i], log_rest, k));
    mass *= grid.cell_volume();
    total += mass;
    lo = std::min(lo, mass);
    hi = std::max(hi, mass);
  }
  CHECK(hi - lo > 0.1);
  CHECK(std::abs(total / 500.0 - 1.0) < 0.02);
}

TEST_CASE("SIR histogram matches the rendered q_ew field") {
  const auto t = builtin_target("mix2");
  const auto q = GaussianProposal::isotropic(2);
  const Grid fine(point({-6.0, -6.0}), point({6.0, 6.0}), {168, 168});
  RngStream rng(1234);
  const auto field = coarsen(plot_qew_grid(t, q, 10, 2000, fine, rng), 7);
  const auto draws = sir_samples(t, q, 10, 100000, rng);
  const double tv = total_variation(histogram_field(draws, field.grid()), field);
  INFO("tv=", tv);
  CHECK(tv < 0.05);
}

TEST_CASE("rendering does not depend on the thread count") {
  const auto t = builtin_target("ring");
  const auto q = GaussianProposal::isotropic(2, 0.0, 0.4);
  const auto grid = Grid::default_for(2);
  set_max_threads(1);
  RngStream a(55);
  const auto one = plot_qew_grid(t, q, 8, 100, grid, a);
  set_max_threads(5);
  RngStream b(55);
  const auto five = plot_qew_grid(t, q, 8, 100, grid, b);
  set_max_threads(0);
  CHECK(max_abs_error(one, five) == 0.0);
}
