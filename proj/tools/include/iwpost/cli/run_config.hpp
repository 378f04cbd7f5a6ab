#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "iwpost/grid.hpp"
#include "iwpost/model.hpp"
#include "iwpost/model_config.hpp"
#include "iwpost/optim.hpp"

namespace iwpost::cli {

/// Bad flags, config values or subcommand. Maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct GridSpec {
  double lo = -Grid::kDefaultHalfWidth;
  double hi = Grid::kDefaultHalfWidth;
  std::size_t points = Grid::kDefaultPoints;

  Grid for_dim(std::size_t dim) const;
};

struct RunConfig {
  std::string command;
  TargetSpec target = builtin_target_spec("mix2");
  GaussianProposal proposal = GaussianProposal::isotropic(2);
  std::vector<std::size_t> k_list;  // empty: the subcommand's default
  std::optional<std::size_t> S;  // unset: the subcommand's default
  std::size_t n = 10000;
  GridSpec grid;
  std::uint64_t seed = 0;
  std::filesystem::path out = ".";
  std::size_t threads = 0;  // 0: all cores
  bool quick = false;
  std::size_t single_batch = 0;
  std::optional<bool> pgm;
  FitOptions fit;

  /// The k list, or `fallback` when none was given.
  std::vector<std::size_t> ks_or(std::vector<std::size_t> fallback) const;
  std::size_t S_or(std::size_t fallback) const { return S.value_or(fallback); }
  /// Exactly one k, or `fallback` when none was given. Throws UsageError for several.
  std::size_t single_k_or(std::size_t fallback) const;
};

/// Keys accepted both as `--flag=value` (with '_' spelled '-') and in config files.
const std::vector<std::string>& config_keys();

/// Interprets merged key=value settings. `env_seed` is the IWPOST_SEED value, used
/// only when no `seed` key is present. Throws UsageError on malformed values.
RunConfig config_from_keys(const std::string& command, const KeyValueConfig& keys,
                           const std::optional<std::string>& env_seed);

}  // namespace iwpost::cli
