#include <map>
#include <optional>
#include <ostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "iwpost/cli/commands.hpp"
#include "iwpost/error.hpp"
#include "iwpost/parallel.hpp"

namespace iwpost::cli {
namespace {

std::string flag_name(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return "--" + key;
}

const std::map<std::string, std::string>& key_help() {
  static const std::map<std::string, std::string> help{
      {"target", "builtin target: gauss1d, gauss2d, mix2, ring (or a name for a target.* config)"},
      {"mean", "proposal mean, comma-separated or one value for every dimension"},
      {"log_std", "proposal log standard deviation, same format as --mean"},
      {"k", "comma-separated sample counts per batch"},
      {"S", "outer batches when rendering q_ew fields"},
      {"n", "draws, samples or batches for Monte Carlo estimates"},
      {"grid_lo", "lower edge of the quadrature grid in every dimension"},
      {"grid_hi", "upper edge of the quadrature grid in every dimension"},
      {"grid_points", "grid cells per dimension"},
      {"seed", "random seed (default: IWPOST_SEED, else 0)"},
      {"out", "output directory"},
      {"threads", "worker thread cap, 0 for all cores"},
      {"quick", "reduced verification suite"},
      {"pgm", "also write PGM heatmaps (default on for dim <= 2)"},
      {"single_batch", "also render this many single-batch fields"},
      {"steps", "fit: gradient steps"},
      {"lr", "fit: learning rate"},
      {"fit_batches", "fit: batches per gradient estimate"},
  };
  return help;
}

int dispatch(const RunConfig& config, std::ostream& out) {
  if (config.command == "bounds") return cmd_bounds(config, out);
  if (config.command == "plot") return cmd_plot(config, out);
  if (config.command == "sample") return cmd_sample(config, out);
  if (config.command == "fit") return cmd_fit(config, out);
  return cmd_verify(config, out);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
        const std::optional<std::string>& env_seed) {
  CLI::App app{"Importance-weighted bounds and implicit posteriors on low-dimensional targets", "iwpost"};
  std::string command;
  app.add_option("command", command, "bounds, plot, sample, fit or verify")
      ->required()
      ->check(CLI::IsMember({"bounds", "plot", "sample", "fit", "verify"}));
  std::string config_path;
  app.add_option("--config", config_path, "key=value file; flags given on the command line win");

  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  bool quick = false;
  for (const auto& key : config_keys()) {
    const auto& help = key_help().at(key);
    if (key == "quick") {
      options[key] = app.add_flag(flag_name(key), quick, help);
    } else {
      options[key] = app.add_option(flag_name(key), values[key], help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitUsage;
  }

  try {
    KeyValueConfig keys;
    if (!config_path.empty()) {
      try {
        keys = KeyValueConfig::load(config_path);
      } catch (const ArgumentError& e) {
        throw UsageError(e.what());
      }
    }
    for (const auto& [key, option] : options) {
      if (option->count() == 0) continue;
      keys.set(key, key == "quick" ? (quick ? "true" : "false") : values[key]);
    }
    const auto config = config_from_keys(command, keys, env_seed);
    set_max_threads(config.threads);
    return dispatch(config, out);
  } catch (const UsageError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitUsage;
  } catch (const ArgumentError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    fmt::print(err, "{} failed: {}\n", command, e.what());
    return kExitFailure;
  }
}

}  // namespace iwpost::cli
