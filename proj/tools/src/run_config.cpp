#include "iwpost/cli/run_config.hpp"

#include <charconv>
#include <fmt/format.h>

#include "iwpost/error.hpp"

namespace iwpost::cli {
namespace {

std::string trimmed(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::uint64_t parse_u64(const std::string& key, std::string_view text) {
  const std::string s = trimmed(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw UsageError(fmt::format("{}: expected a non-negative integer, got '{}'", key, text));
  }
  return v;
}

std::size_t parse_count(const std::string& key, std::string_view text) {
  return static_cast<std::size_t>(parse_u64(key, text));
}

double parse_real(const std::string& key, std::string_view text) {
  const std::string s = trimmed(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw UsageError(fmt::format("{}: expected a number, got '{}'", key, text));
  }
  return v;
}

bool parse_bool(const std::string& key, std::string_view text) {
  const std::string s = trimmed(text);
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw UsageError(fmt::format("{}: expected true or false, got '{}'", key, text));
}

std::vector<std::size_t> parse_counts(const std::string& key, std::string_view text) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    out.push_back(parse_count(key, text.substr(start, end - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

Grid GridSpec::for_dim(std::size_t dim) const {
  return Grid(Vector::Constant(static_cast<Eigen::Index>(dim), lo), Vector::Constant(static_cast<Eigen::Index>(dim), hi),
              std::vector<std::size_t>(dim, points));
}

std::vector<std::size_t> RunConfig::ks_or(std::vector<std::size_t> fallback) const {
  return k_list.empty() ? fallback : k_list;
}

std::size_t RunConfig::single_k_or(std::size_t fallback) const {
  if (k_list.empty()) return fallback;
  if (k_list.size() != 1) throw UsageError(fmt::format("{} takes a single k", command));
  return k_list.front();
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "target", "mean",  "log_std", "k",    "S",   "n",          "grid_lo",     "grid_hi",     "grid_points",
      "seed",   "out",   "threads", "quick", "pgm", "single_batch", "steps",      "lr",          "fit_batches"};
  return keys;
}

RunConfig config_from_keys(const std::string& command, const KeyValueConfig& keys,
                           const std::optional<std::string>& env_seed) {
  RunConfig cfg;
  cfg.command = command;
  try {
    cfg.target = target_spec_from_config(keys);
    cfg.proposal = proposal_from_config(keys, cfg.target.dim);
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }

  if (auto v = keys.get("k")) {
    cfg.k_list = parse_counts("k", *v);
    for (std::size_t k : cfg.k_list) {
      if (k == 0) throw UsageError("k: every entry must be at least 1");
    }
  }
  if (auto v = keys.get("S")) cfg.S = parse_count("S", *v);
  if (auto v = keys.get("n")) cfg.n = parse_count("n", *v);
  if (auto v = keys.get("grid_lo")) cfg.grid.lo = parse_real("grid_lo", *v);
  if (auto v = keys.get("grid_hi")) cfg.grid.hi = parse_real("grid_hi", *v);
  if (auto v = keys.get("grid_points")) cfg.grid.points = parse_count("grid_points", *v);
  if (!(cfg.grid.lo < cfg.grid.hi) || cfg.grid.points == 0) throw UsageError("grid: need grid_lo < grid_hi and grid_points > 0");

  if (auto v = keys.get("seed")) {
    cfg.seed = parse_u64("seed", *v);
  } else if (env_seed && !trimmed(*env_seed).empty()) {
    cfg.seed = parse_u64("IWPOST_SEED", *env_seed);
  }
  if (auto v = keys.get("out")) cfg.out = trimmed(*v);
  if (auto v = keys.get("threads")) cfg.threads = parse_count("threads", *v);
  if (auto v = keys.get("quick")) cfg.quick = parse_bool("quick", *v);
  if (auto v = keys.get("pgm")) cfg.pgm = parse_bool("pgm", *v);
  if (auto v = keys.get("single_batch")) cfg.single_batch = parse_count("single_batch", *v);
  if (auto v = keys.get("steps")) cfg.fit.steps = parse_count("steps", *v);
  if (auto v = keys.get("lr")) cfg.fit.learning_rate = parse_real("lr", *v);
  if (auto v = keys.get("fit_batches")) cfg.fit.n_batches = parse_count("fit_batches", *v);
  if (!(cfg.fit.learning_rate > 0.0)) throw UsageError("lr must be positive");
  return cfg;
}

}  // namespace iwpost::cli
