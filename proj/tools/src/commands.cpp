#include "iwpost/cli/commands.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "iwpost/atomic_file.hpp"
#include "iwpost/bounds.hpp"
#include "iwpost/cli/verify.hpp"
#include "iwpost/error.hpp"
#include "iwpost/field_io.hpp"
#include "iwpost/implicit.hpp"
#include "iwpost/oracle.hpp"
#include "iwpost/optim.hpp"
#include "iwpost/parallel.hpp"
#include "iwpost/stats.hpp"

namespace iwpost::cli {
namespace {

constexpr std::size_t kMaxQuadratureDim = 3;
constexpr std::size_t kHistogramPoints = 168;
constexpr std::size_t kHistogramCoarsen = 7;
// A single batch's q_iw mass has sd near 0.5 on the builtins; 2000 batches keep the
// rendered q_ew mass well inside the estimator's 0.05 sanity band.
constexpr std::size_t kBoundsS = 2000;
constexpr std::size_t kPlotS = 500;

// Stream ids keep each piece of a subcommand's randomness independent of the others.
enum StreamId : std::uint64_t { kVaeStream = 1, kIwaeStream = 100, kQewStream = 10000, kBatchStream = 20000 };

std::string vector_text(const Vector& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += fmt::format("{}{:.6g}", i ? ", " : "", v[i]);
  return s + "]";
}

std::string with_error(double value, double se) {
  if (!std::isfinite(value)) return "n/a";
  return fmt::format("{:.6f} +- {:.6f}", value, se);
}

void describe(const RunConfig& config, std::ostream& out) {
  fmt::print(out, "target {} (dim {}), proposal mean={} log_std={}, seed {}\n", config.target.name, config.target.dim,
             vector_text(config.proposal.mean()), vector_text(config.proposal.log_std()), config.seed);
}

void write_field(const std::filesystem::path& dir, const std::string& stem, const DensityField& field, bool pgm) {
  write_field_csv(dir / (stem + ".csv"), field);
  if (pgm) write_field_pgm(dir / (stem + ".pgm"), field);
}

}  // namespace

DensityField coarse_posterior(const TargetModel& t, double lo, double hi) {
  const GridSpec fine{lo, hi, kHistogramPoints};
  return coarsen(true_posterior_field(t, fine.for_dim(t.dim())), kHistogramCoarsen);
}

double sample_tv(std::span<const LatentPoint> samples, const DensityField& reference) {
  std::size_t outside = 0;
  for (const auto& z : samples) {
    if (!reference.grid().locate(z)) ++outside;
  }
  return total_variation(histogram_field(samples, reference.grid()), reference) +
         0.5 * static_cast<double>(outside) / static_cast<double>(samples.size());
}

int cmd_bounds(const RunConfig& config, std::ostream& out) {
  const auto t = make_target(config.target);
  const auto& q = config.proposal;
  const auto ks = config.ks_or({1, 5, 10, 50});
  const bool quadrature_ok = t.dim() <= kMaxQuadratureDim;
  const auto grid = config.grid.for_dim(t.dim());

  RngStream vae_rng(config.seed, kVaeStream);
  const auto vae = vae_elbo_mc(t, q, config.n, vae_rng);
  const double log_p = quadrature_ok ? log_marginal(t, grid) : std::numeric_limits<double>::quiet_NaN();

  describe(config, out);
  fmt::print(out, "{:>6}  {:>24}  {:>24}  {:>24}  {:>12}\n", "k", "L_VAE[q]", "L_IWAE[q]", "L_VAE[q_EW]", "log p(x)");
  std::string csv = "k,vae,vae_se,iwae,iwae_se,vae_qew,vae_qew_se,log_p\n";
  for (std::size_t k : ks) {
    RngStream iwae_rng(config.seed, kIwaeStream + k);
    const auto iwae = iwae_elbo_mc(t, q, k, config.n, iwae_rng);
    BoundEstimate qew;
    qew.value = std::numeric_limits<double>::quiet_NaN();
    if (quadrature_ok) {
      RngStream qew_rng(config.seed, kQewStream + k);
      qew = vae_elbo_qew_quadrature(t, q, k, config.S_or(kBoundsS), grid, qew_rng);
    }
    fmt::print(out, "{:>6}  {:>24}  {:>24}  {:>24}  {:>12}\n", k, with_error(vae.value, vae.std_error),
               with_error(iwae.value, iwae.std_error), with_error(qew.value, qew.std_error),
               std::isfinite(log_p) ? fmt::format("{:.6f}", log_p) : "n/a");
    csv += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", k, vae.value, vae.std_error,
                       iwae.value, iwae.std_error, qew.value, qew.std_error, log_p);
  }
  write_file_atomic(config.out / "bounds.csv", csv);
  return kExitOk;
}

int cmd_plot(const RunConfig& config, std::ostream& out) {
  const auto t = make_target(config.target);
  const auto& q = config.proposal;
  if (t.dim() > kMaxQuadratureDim) throw UsageError("plot needs dim <= 3");
  if (config.pgm.value_or(false) && t.dim() > 2) throw UsageError("PGM output needs dim <= 2");
  const bool pgm = config.pgm.value_or(t.dim() <= 2);
  const auto grid = config.grid.for_dim(t.dim());
  const auto ks = config.ks_or({1, 10, 100});

  describe(config, out);
  const auto posterior = true_posterior_field(t, grid);
  write_field(config.out, "posterior", posterior, pgm);
  write_field(config.out, "proposal", proposal_field(q, grid), pgm);
  fmt::print(out, "{:>6}  {:>12}  {:>14}\n", "k", "mass", "max_abs_error");
  for (std::size_t k : ks) {
    RngStream rng(config.seed, kQewStream + k);
    const auto field = plot_qew_grid(t, q, k, config.S_or(kPlotS), grid, rng);
    write_field(config.out, fmt::format("qew_k{}", k), field, pgm);
    fmt::print(out, "{:>6}  {:>12.6f}  {:>14.6g}\n", k, quadrature(field), max_abs_error(field, posterior));
  }
  for (std::size_t i = 0; i < config.single_batch; ++i) {
    for (std::size_t k : ks) {
      RngStream rng(config.seed, kBatchStream + i);
      const auto field = plot_qew_grid(t, q, k, 1, grid, rng);
      write_field(config.out, fmt::format("qiw_k{}_batch{}", k, i), field, pgm);
      fmt::print(out, "single batch {} k={}: mass {:.6f}\n", i, k, quadrature(field));
    }
  }
  fmt::print(out, "wrote fields to {}\n", config.out.string());
  return kExitOk;
}

int cmd_sample(const RunConfig& config, std::ostream& out) {
  const auto t = make_target(config.target);
  const auto& q = config.proposal;
  const std::size_t k = config.single_k_or(50);

  RngStream sir_rng(config.seed, kIwaeStream + k);
  RngStream q_rng(config.seed, kVaeStream);
  const auto sir = sir_samples(t, q, k, config.n, sir_rng);
  const auto plain = replicate<LatentPoint>(config.n, q_rng, [&](RngStream& s) { return proposal_sample(q, s); });
  write_file_atomic(config.out / "sir_samples.csv", samples_to_csv(sir));
  write_file_atomic(config.out / "proposal_samples.csv", samples_to_csv(plain));

  describe(config, out);
  fmt::print(out, "{} SIR draws (k={}) and {} proposal draws\n", config.n, k, config.n);
  if (t.dim() <= 2) {
    const auto reference = coarse_posterior(t, config.grid.lo, config.grid.hi);
    fmt::print(out, "TV to posterior: SIR {:.6f}, proposal {:.6f}\n", sample_tv(sir, reference),
               sample_tv(plain, reference));
  }
  for (std::size_t d = 0; d < t.dim(); ++d) {
    std::vector<double> a, b;
    for (const auto& z : sir) a.push_back(z[static_cast<Eigen::Index>(d)]);
    for (const auto& z : plain) b.push_back(z[static_cast<Eigen::Index>(d)]);
    fmt::print(out, "KS(SIR, proposal) dim {}: {:.6f}\n", d, ks_two_sample(std::move(a), std::move(b)));
  }
  return kExitOk;
}

int cmd_fit(const RunConfig& config, std::ostream& out) {
  const auto t = make_target(config.target);
  const std::size_t k = config.single_k_or(1);
  RngStream rng(config.seed);
  const auto fit = fit_proposal(t, config.proposal, k, config.fit, rng);

  write_file_atomic(config.out / "trace.csv", trace_to_csv(fit.trace));
  KeyValueConfig saved;
  write_target_spec(saved, config.target);
  write_proposal(saved, fit.proposal);
  write_file_atomic(config.out / "proposal.cfg", saved.to_string());

  describe(config, out);
  if (fit.diverged) {
    fmt::print(out, "diverged after {} of {} steps; partial trace written\n", fit.trace.size(), config.fit.steps);
    return kExitFailure;
  }
  fmt::print(out, "fitted k={} over {} steps: mean={} std={}\n", k, fit.trace.size(), vector_text(fit.proposal.mean()),
             vector_text(fit.proposal.std_dev()));
  RngStream vae_rng(config.seed, kVaeStream);
  RngStream iwae_rng(config.seed, kIwaeStream + k);
  const auto vae = vae_elbo_mc(t, fit.proposal, config.n, vae_rng);
  const auto iwae = iwae_elbo_mc(t, fit.proposal, k, config.n, iwae_rng);
  fmt::print(out, "L_VAE[q] = {}\nL_IWAE[q] (k={}) = {}\n", with_error(vae.value, vae.std_error), k,
             with_error(iwae.value, iwae.std_error));
  if (t.dim() <= kMaxQuadratureDim) fmt::print(out, "log p(x) = {:.6f}\n", log_marginal(t, config.grid.for_dim(t.dim())));
  return kExitOk;
}

int cmd_verify(const RunConfig& config, std::ostream& out) {
  VerifyOptions options;
  options.seed = config.seed;
  options.quick = config.quick;
  const auto report = run_verify(options);
  out << report.to_text();
  return report.all_passed() ? kExitOk : kExitFailure;
}

}  // namespace iwpost::cli
