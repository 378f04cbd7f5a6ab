#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "iwpost/cli/run_config.hpp"
#include "iwpost/grid.hpp"
#include "iwpost/model.hpp"

namespace iwpost::cli {

// Each subcommand writes its report to `out` and its files under config.out, and
// returns an exit code. Estimator failures propagate as exceptions.

/// Bound table per k: L_VAE[q], L_IWAE[q], L_VAE[q_ew] and log p(x), with standard
/// errors. Writes bounds.csv.
int cmd_bounds(const RunConfig& config, std::ostream& out);

/// qew_k{K}, posterior and proposal fields as .csv (and .pgm for dim <= 2). With
/// single_batch = N also qiw_k{K}_batch{i} fields rendered from one batch each.
int cmd_plot(const RunConfig& config, std::ostream& out);

/// sir_samples.csv and proposal_samples.csv with n draws each, plus TV distances to
/// the posterior (dim <= 2) and per-marginal KS statistics between the two sets.
int cmd_sample(const RunConfig& config, std::ostream& out);

/// trace.csv and proposal.cfg. Returns kExitFailure when the run diverges.
int cmd_fit(const RunConfig& config, std::ostream& out);

/// Runs the invariant suite. kExitOk iff every check passes.
int cmd_verify(const RunConfig& config, std::ostream& out);

/// Parses arguments, dispatches and maps errors to exit codes. `env_seed` stands in
/// for the IWPOST_SEED environment variable.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
        const std::optional<std::string>& env_seed);

/// Posterior on a 24-cell-per-dimension histogram grid over [lo, hi] (a 168-point
/// quadrature grid coarsened by 7). dim <= 2.
DensityField coarse_posterior(const TargetModel& t, double lo, double hi);

/// Total variation between the samples' histogram and `reference`, on its grid.
/// Samples outside the grid count as mismatched mass.
double sample_tv(std::span<const LatentPoint> samples, const DensityField& reference);

}  // namespace iwpost::cli
