#include "iwpost/cli/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "iwpost/bounds.hpp"
#include "iwpost/cli/commands.hpp"
#include "iwpost/oracle.hpp"
#include "iwpost/optim.hpp"
#include "iwpost/parallel.hpp"
#include "iwpost/stats.hpp"
#include "iwpost/weights.hpp"

namespace iwpost::cli {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;
constexpr double kRingLogZ = 2.24598997584830996773;  // radial integral at 30 digits

struct Sizes {
  std::vector<std::size_t> ordering_ks;
  std::size_t mc_draws;         // VAE draws and IWAE batches
  std::size_t S;                // q_ew renders
  std::size_t bound_S;          // q_ew renders inside L_VAE[q_ew]
  std::size_t equality_batches;
  std::vector<std::size_t> normalization_ks;
  std::size_t normalization_groups;
  std::size_t single_batches;
  std::size_t sir_draws;
  std::size_t gradient_configs;
  std::size_t gradient_batches;
  std::size_t spot_draws;
};

Sizes sizes_for(bool quick) {
  if (quick) return {{2, 10}, 2000, 200, 1000, 300, {2, 10}, 20, 200, 20000, 5, 4000, 20000};
  return {{2, 5, 10, 50}, 10000, 500, 2000, 2000, {2, 3, 10}, 50, 500, 100000, 20, 10000, 100000};
}

// Fixed per check so each check's randomness does not depend on which others run.
enum CheckStream : std::uint64_t {
  kOrderingStream = 1,
  kEqualityStream,
  kNormalizationStream,
  kSingleBatchStream,
  kKlStream,
  kConvergenceStream,
  kSirStream,
  kGradientStream,
  kFitStream,
  kConstantStream,
  kSpotStream,
};

std::string num(double v) { return fmt::format("{:.6g}", v); }

double combined(double a, double b) { return std::sqrt(a * a + b * b); }

// a <= b up to three combined standard errors, plus the quadrature tolerance when
// either side comes from a grid.
bool ordered(const BoundEstimate& a, const BoundEstimate& b, bool quadrature) {
  return a.value - b.value <= 3.0 * combined(a.std_error, b.std_error) + (quadrature ? 1e-3 : 0.0);
}

CheckResult check_normalize_weights() {
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<double> log_w{-1000.5, -1001.0, -999.0, -inf, -1003.25};
  std::vector<double> shifted;
  for (double v : log_w) shifted.push_back(v + 1700.0);
  const auto a = normalize_weights(log_w);
  const auto b = normalize_weights(shifted);
  double diff = 0.0, total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    total += a[i];
  }
  const bool ok = diff < 1e-12 && std::abs(total - 1.0) < 1e-12 && a[3] == 0.0;
  return {"weights.shift_invariance", ok, fmt::format("max diff {}, sum {}", num(diff), num(total))};
}

CheckResult check_log_marginal() {
  const double mix2 = log_marginal(builtin_target("mix2"), Grid::default_for(2));
  const double gauss1d = log_marginal(builtin_target("gauss1d"), Grid::default_for(1));
  const double ring = log_marginal(builtin_target("ring"), Grid::default_for(2));
  const bool ok = std::abs(mix2) < 1e-5 && std::abs(gauss1d - kHalfLog2Pi) < 1e-6 && std::abs(ring - kRingLogZ) < 1e-6;
  return {"oracle.log_marginal", ok,
          fmt::format("mix2 {}, gauss1d {} (exact {}), ring {} (exact {})", num(mix2), num(gauss1d), num(kHalfLog2Pi),
                      num(ring), num(kRingLogZ))};
}

CheckResult check_constant_weights(RngStream& rng) {
  const auto t = builtin_target("gauss1d");
  const auto q = GaussianProposal::isotropic(1);
  const auto vae = vae_elbo_mc(t, q, 1000, rng);
  const auto iwae = iwae_elbo_mc(t, q, 5, 200, rng);
  const auto qew = vae_elbo_qew_quadrature(t, q, 5, 50, Grid::default_for(1), rng);
  const bool ok = std::abs(vae.value - kHalfLog2Pi) < 1e-9 && vae.std_error < 1e-9 &&
                  std::abs(iwae.value - kHalfLog2Pi) < 1e-9 && iwae.std_error < 1e-9 &&
                  std::abs(qew.value - kHalfLog2Pi) < 1e-6 && qew.std_error < 1e-9;
  return {"bounds.constant_weight", ok,
          fmt::format("vae {} (se {}), iwae {} (se {}), vae_qew {} (se {}), expected {}", num(vae.value),
                      num(vae.std_error), num(iwae.value), num(iwae.std_error), num(qew.value), num(qew.std_error),
                      num(kHalfLog2Pi))};
}

CheckResult check_vae_spot(const Sizes& sz, RngStream& rng) {
  const double expected = kHalfLog2Pi - 0.125;
  const auto est = vae_elbo_mc(builtin_target("gauss1d"), GaussianProposal::isotropic(1, 0.5), sz.spot_draws, rng);
  const bool ok = std::abs(est.value - expected) < 3.0 * est.std_error;
  return {"bounds.vae_spot", ok,
          fmt::format("L_VAE {} +- {} vs {} (n={})", num(est.value), num(est.std_error), num(expected), sz.spot_draws)};
}

CheckResult check_ordering(const Sizes& sz, RngStream& rng) {
  const auto t = builtin_target("mix2");
  const auto q = GaussianProposal::isotropic(2);
  const auto grid = Grid::default_for(2);
  const auto vae = vae_elbo_mc(t, q, sz.mc_draws, rng);
  BoundEstimate log_p;
  log_p.value = log_marginal(t, grid);
  bool ok = true;
  std::string detail = fmt::format("vae {} +- {}, log p {}", num(vae.value), num(vae.std_error), num(log_p.value));
  for (std::size_t k : sz.ordering_ks) {
    const auto iwae = iwae_elbo_mc(t, q, k, sz.mc_draws, rng);
    const auto qew = vae_elbo_qew_quadrature(t, q, k, sz.bound_S, grid, rng);
    ok = ok && ordered(vae, iwae, false) && ordered(iwae, qew, true) && ordered(qew, log_p, true);
    detail += fmt::format("; k={}: iwae {} +- {}, vae_qew {} +- {}", k, num(iwae.value), num(iwae.std_error),
                          num(qew.value), num(qew.std_error));
  }
  return {"bounds.ordering", ok, detail};
}

CheckResult check_qiw_equality(const Sizes& sz, RngStream& rng) {
  const auto t = builtin_target("mix2");
  const auto q = GaussianProposal::isotropic(2);
  const auto expected = expected_vae_bound_of_qiw(t, q, 5, sz.equality_batches, Grid::default_for(2), rng);
  const auto direct = iwae_elbo_mc(t, q, 5, sz.mc_draws, rng);
  const double tol = 3.0 * combined(expected.std_error, direct.std_error);
  const bool ok = std::abs(expected.value - direct.value) < tol;
  return {"bounds.qiw_equality", ok,
          fmt::format("k=5: mean quadrature bound {} +- {} over {} batches, iwae {} +- {}, |diff| {} < {}",
                      num(expected.value), num(expected.std_error), sz.equality_batches, num(direct.value),
                      num(direct.std_error), num(std::abs(expected.value - direct.value)), num(tol))};
}

CheckResult check_normalization(const Sizes& sz, const QewRenderer& renderer, RngStream& rng) {
  const auto grid = Grid::default_for(2);
  const auto q = GaussianProposal::isotropic(2);
  bool ok = true;
  std::string detail;
  for (const char* name : {"mix2", "ring"}) {
    for (std::size_t k : sz.normalization_ks) {
      const auto render = renderer(builtin_target(name), q, k, sz.S, grid, rng, sz.normalization_groups);
      std::vector<double> group_mass;
      for (std::size_t g = 0; g < render.group_sums.size(); ++g) {
        double sum = 0.0;
        for (double v : render.group_sums[g]) sum += v;
        group_mass.push_back(sum * grid.cell_volume() / static_cast<double>(render.group_sizes[g]));
      }
      const double mass = quadrature(render.field);
      const double se = mean_std_error(group_mass).std_error;
      ok = ok && std::abs(mass - 1.0) < 4.0 * se + 1e-3;
      detail += fmt::format("{}{} k={}: {} +- {}", detail.empty() ? "" : "; ", name, k, num(mass), num(se));
    }
  }
  return {"implicit.normalization", ok, detail};
}

CheckResult check_single_batch_mass(const Sizes& sz, RngStream& rng) {
  const auto t = builtin_target("mix2");
  const auto q = GaussianProposal::isotropic(2);
  const auto grid = Grid::default_for(2);
  const auto cells = evaluate_cells(t, q, grid);
  constexpr std::size_t k = 3;
  const auto log_rest = replicate<double>(sz.single_batches, rng,
                                          [&](RngStream& s) { return draw_log_rest_sum(t, q, k, s); });
  std::vector<double> masses;
  for (double lr : log_rest) {
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) sum += std::exp(qiw_log_from_parts(cells.log_p[i], cells.log_q[i], lr, k));
    masses.push_back(sum * grid.cell_volume());
  }
  const auto stats = mean_std_error(masses);
  const auto [lo, hi] = std::minmax_element(masses.begin(), masses.end());
  const bool ok = std::abs(stats.mean - 1.0) < 4.0 * stats.std_error && *hi - *lo > 0.01;
  return {"implicit.single_batch_mass", ok,
          fmt::format("k=3, {} batches: mean {} +- {}, range [{}, {}]", sz.single_batches, num(stats.mean),
                      num(stats.std_error), num(*lo), num(*hi))};
}

CheckResult check_kl_ordering(const Sizes& sz, const QewRenderer& renderer, RngStream& rng) {
  const auto t = builtin_target("mix2");
  const auto q = GaussianProposal::isotropic(2);
  const auto grid = Grid::default_for(2);
  const auto posterior = true_posterior_field(t, grid);
  const double kl_q = kl_field(posterior, proposal_field(q, grid));
  const double kl_qew = kl_field(posterior, renderer(t, q, 10, sz.S, grid, rng, 1).field);
  const bool ok = kl_qew < kl_q - 0.01;
  return {"oracle.kl_ordering", ok, fmt::format("k=10: KL(q_ew) {} < KL(q) {}", num(kl_qew), num(kl_q))};
}

CheckResult check_convergence(const Sizes& sz, const QewRenderer& renderer, RngStream& rng) {
  const auto t = builtin_target("mix2");
  const auto q = GaussianProposal::isotropic(2);
  const auto grid = Grid::default_for(2);
  const auto posterior = true_posterior_field(t, grid);
  std::vector<double> errors;
  for (std::size_t k : {1, 10, 100}) errors.push_back(max_abs_error(renderer(t, q, k, sz.S, grid, rng, 1).field, posterior));
  const bool ok = errors[1] < errors[0] && errors[2] < errors[1] && errors[2] < 0.25 * errors[0];
  return {"implicit.convergence", ok,
          fmt::format("max abs error k=1 {}, k=10 {}, k=100 {} (ratio {})", num(errors[0]), num(errors[1]),
                      num(errors[2]), num(errors[2] / errors[0]))};
}

CheckResult check_sir_tv(const Sizes& sz, RngStream& rng) {
  const auto t = builtin_target("mix2");
  const auto q = GaussianProposal::isotropic(2);
  const auto reference = coarse_posterior(t, -Grid::kDefaultHalfWidth, Grid::kDefaultHalfWidth);
  const auto sir = sir_samples(t, q, 50, sz.sir_draws, rng);
  const auto plain = replicate<LatentPoint>(sz.sir_draws, rng, [&](RngStream& s) { return proposal_sample(q, s); });
  const double tv_sir = sample_tv(sir, reference);
  const double tv_q = sample_tv(plain, reference);
  return {"implicit.sir_tv", tv_sir < 0.5 * tv_q,
          fmt::format("k=50, n={}: TV(SIR) {} < TV(q) / 2 = {}", sz.sir_draws, num(tv_sir), num(0.5 * tv_q))};
}

CheckResult check_gradient(const Sizes& sz, RngStream& rng) {
  const std::vector<std::string> names{"mix2", "ring", "gauss2d", "gauss1d"};
  constexpr double h = 1e-4;
  double worst = 0.0;
  for (std::size_t c = 0; c < sz.gradient_configs; ++c) {
    const auto t = builtin_target(names[c % names.size()]);
    const GaussianProposal q(0.8 * standard_normal(t.dim(), rng), 0.3 * standard_normal(t.dim(), rng));
    const std::size_t k = 1 + static_cast<std::size_t>(rng.uniform() * 10.0);
    Vector direction = standard_normal(2 * t.dim(), rng);
    direction.normalize();
    const std::uint64_t seed = rng.next_u64();

    RngStream grad_rng(seed);
    const double analytic = iwae_gradient(t, q, k, sz.gradient_batches, grad_rng).gradient.packed().dot(direction);
    const auto d = static_cast<Eigen::Index>(t.dim());
    const auto shifted = [&](double step) {
      RngStream s(seed);
      const GaussianProposal moved(q.mean() + step * direction.head(d), q.log_std() + step * direction.tail(d));
      return iwae_elbo_mc(t, moved, k, sz.gradient_batches, s).value;
    };
    const double numeric = (shifted(h) - shifted(-h)) / (2.0 * h);
    worst = std::max(worst, std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8}));
  }
  return {"optim.gradient_fd", worst < 1e-2,
          fmt::format("{} configurations, max relative error {}", sz.gradient_configs, num(worst))};
}

CheckResult check_fit(RngStream& rng) {
  const GaussianProposal q0(Vector::Constant(1, 2.0), Vector::Constant(1, 1.0));
  const auto fit = fit_proposal(builtin_target("gauss1d"), q0, 1, FitOptions{}, rng);
  const double mean = fit.proposal.mean()[0];
  const double sd = fit.proposal.std_dev()[0];
  const bool ok = !fit.diverged && std::abs(mean) < 0.05 && std::abs(sd - 1.0) < 0.05;
  return {"optim.fit", ok, fmt::format("gauss1d from mean 2, log std 1, k=1, {} steps: mean {}, std {}", fit.trace.size(),
                                       num(mean), num(sd))};
}

}  // namespace

bool VerifyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string VerifyReport::to_text() const {
  std::string text;
  std::size_t passed = 0;
  for (const auto& c : checks) {
    text += fmt::format("{} {}: {}\n", c.passed ? "PASS" : "FAIL", c.name, c.detail);
    passed += c.passed ? 1 : 0;
  }
  text += fmt::format("{}/{} checks passed\n", passed, checks.size());
  return text;
}

VerifyReport run_verify(const VerifyOptions& options) {
  const auto sz = sizes_for(options.quick);
  const auto stream = [&](CheckStream id) { return RngStream(options.seed, id); };
  VerifyReport report;
  auto add = [&](const char* name, auto&& check) {
    try {
      report.checks.push_back(check());
    } catch (const std::exception& e) {
      report.checks.push_back({name, false, fmt::format("error: {}", e.what())});
    }
  };

  add("weights.shift_invariance", [&] { return check_normalize_weights(); });
  add("oracle.log_marginal", [&] { return check_log_marginal(); });
  add("bounds.constant_weight", [&] {
    auto rng = stream(kConstantStream);
    return check_constant_weights(rng);
  });
  add("bounds.vae_spot", [&] {
    auto rng = stream(kSpotStream);
    return check_vae_spot(sz, rng);
  });
  add("bounds.ordering", [&] {
    auto rng = stream(kOrderingStream);
    return check_ordering(sz, rng);
  });
  add("bounds.qiw_equality", [&] {
    auto rng = stream(kEqualityStream);
    return check_qiw_equality(sz, rng);
  });
  add("implicit.normalization", [&] {
    auto rng = stream(kNormalizationStream);
    return check_normalization(sz, options.renderer, rng);
  });
  add("implicit.single_batch_mass", [&] {
    auto rng = stream(kSingleBatchStream);
    return check_single_batch_mass(sz, rng);
  });
  add("oracle.kl_ordering", [&] {
    auto rng = stream(kKlStream);
    return check_kl_ordering(sz, options.renderer, rng);
  });
  add("implicit.convergence", [&] {
    auto rng = stream(kConvergenceStream);
    return check_convergence(sz, options.renderer, rng);
  });
  add("implicit.sir_tv", [&] {
    auto rng = stream(kSirStream);
    return check_sir_tv(sz, rng);
  });
  add("optim.gradient_fd", [&] {
    auto rng = stream(kGradientStream);
    return check_gradient(sz, rng);
  });
  add("optim.fit", [&] {
    auto rng = stream(kFitStream);
    return check_fit(rng);
  });
  return report;
}

}  // namespace iwpost::cli
