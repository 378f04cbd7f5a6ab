#include "iwpost/model_config.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "iwpost/error.hpp"

namespace iwpost {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_real(std::string_view text) {
  const auto s = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    // from_chars rejects "inf"/"nan" spellings on some libstdc++ builds; fall back to strtod.
    std::string copy(s);
    char* end = nullptr;
    value = std::strtod(copy.c_str(), &end);
    if (copy.empty() || end != copy.c_str() + copy.size()) {
      throw ArgumentError("not a number: '" + std::string(s) + "'");
    }
  }
  return value;
}

std::size_t parse_count(std::string_view text) {
  const double v = parse_real(text);
  if (!(v >= 0.0) || v != std::floor(v)) throw ArgumentError("not a count: '" + std::string(text) + "'");
  return static_cast<std::size_t>(v);
}

std::string require(const KeyValueConfig& cfg, const std::string& key) {
  auto v = cfg.get(key);
  if (!v) throw ArgumentError("config is missing required key '" + key + "'");
  return *v;
}

Vector broadcast(const Vector& v, std::size_t dim, const char* key) {
  if (static_cast<std::size_t>(v.size()) == dim) return v;
  if (v.size() == 1) return Vector::Constant(static_cast<Eigen::Index>(dim), v[0]);
  throw ArgumentError(fmt::format("'{}' has {} entries, expected {}", key, v.size(), dim));
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ArgumentError(fmt::format("config line {}: expected key=value", line_no));
    }
    const auto key = trim(view.substr(0, eq));
    if (key.empty()) throw ArgumentError(fmt::format("config line {}: empty key", line_no));
    cfg.entries_[std::string(key)] = std::string(trim(view.substr(eq + 1)));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse(in);
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open config file '" + path.string() + "'");
  return parse(in);
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void KeyValueConfig::merge(const KeyValueConfig& overrides) {
  for (const auto& [k, v] : overrides.entries_) entries_[k] = v;
}

std::string KeyValueConfig::to_string() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
  return out;
}

std::string format_reals(const Vector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt::format("{:.17g}", v[i]);
  }
  return out;
}

Vector parse_reals(std::string_view text) {
  std::vector<double> values;
  std::string_view rest = trim(text);
  if (rest.empty()) throw ArgumentError("empty list of numbers");
  while (true) {
    const auto comma = rest.find(',');
    values.push_back(parse_real(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

TargetSpec target_spec_from_config(const KeyValueConfig& cfg) {
  const auto family = cfg.get("target.family");
  if (!family) return builtin_target_spec(cfg.get("target").value_or("mix2"));

  TargetSpec spec;
  spec.name = cfg.get("target").value_or("custom");
  spec.dim = parse_count(require(cfg, "target.dim"));
  if (*family == "ring") {
    spec.family = TargetSpec::Family::ring;
    if (auto r = cfg.get("target.radius")) spec.radius = parse_real(*r);
    if (auto w = cfg.get("target.width")) spec.width = parse_real(*w);
  } else if (*family == "mixture") {
    const std::size_t n = parse_count(require(cfg, "target.components"));
    for (std::size_t i = 0; i < n; ++i) {
      const std::string prefix = fmt::format("target.component.{}.", i);
      MixtureComponent c;
      const double weight = parse_real(require(cfg, prefix + "weight"));
      if (!(weight > 0.0)) throw ArgumentError(prefix + "weight must be positive");
      c.log_weight = std::log(weight);
      c.mean = broadcast(parse_reals(require(cfg, prefix + "mean")), spec.dim, "mean");
      c.std = parse_real(require(cfg, prefix + "std"));
      spec.components.push_back(std::move(c));
    }
  } else {
    throw ArgumentError("unknown target.family '" + *family + "' (expected mixture or ring)");
  }
  make_target(spec);  // validates
  return spec;
}

void write_target_spec(KeyValueConfig& cfg, const TargetSpec& spec) {
  cfg.set("target", spec.name);
  cfg.set("target.dim", std::to_string(spec.dim));
  if (spec.family == TargetSpec::Family::ring) {
    cfg.set("target.family", "ring");
    cfg.set("target.radius", fmt::format("{:.17g}", spec.radius));
    cfg.set("target.width", fmt::format("{:.17g}", spec.width));
    return;
  }
  cfg.set("target.family", "mixture");
  cfg.set("target.components", std::to_string(spec.components.size()));
  for (std::size_t i = 0; i < spec.components.size(); ++i) {
    const auto& c = spec.components[i];
    const std::string prefix = fmt::format("target.component.{}.", i);
    cfg.set(prefix + "weight", fmt::format("{:.17g}", std::exp(c.log_weight)));
    cfg.set(prefix + "mean", format_reals(c.mean));
    cfg.set(prefix + "std", fmt::format("{:.17g}", c.std));
  }
}

GaussianProposal proposal_from_config(const KeyValueConfig& cfg, std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  Vector mean = Vector::Zero(n);
  Vector log_std = Vector::Zero(n);
  if (auto m = cfg.get("mean")) mean = broadcast(parse_reals(*m), dim, "mean");
  if (auto s = cfg.get("log_std")) log_std = broadcast(parse_reals(*s), dim, "log_std");
  return GaussianProposal(std::move(mean), std::move(log_std));
}

void write_proposal(KeyValueConfig& cfg, const GaussianProposal& q) {
  cfg.set("mean", format_reals(q.mean()));
  cfg.set("log_std", format_reals(q.log_std()));
}

}  // namespace iwpost
