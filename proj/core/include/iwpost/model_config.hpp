#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iwpost/model.hpp"

namespace iwpost {

/// Plain-text `key=value` configuration. One entry per line, '#' starts a comment,
/// surrounding whitespace is ignored. Later lines override earlier ones.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig parse(std::string_view text);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool contains(const std::string& key) const { return entries_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }
  void merge(const KeyValueConfig& overrides);

  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

  /// Sorted `key=value` lines.
  std::string to_string() const;

 private:
  std::map<std::string, std::string> entries_;
};

/// Comma-separated reals, written with round-trip precision.
std::string format_reals(const Vector& v);
Vector parse_reals(std::string_view text);

/// `target=<builtin>` selects a builtin; a `target.family` key switches to a fully
/// described target (`target.dim`, `target.component.<i>.{weight,mean,std}` or
/// `target.radius`/`target.width`).
TargetSpec target_spec_from_config(const KeyValueConfig& cfg);
void write_target_spec(KeyValueConfig& cfg, const TargetSpec& spec);

/// `mean=` and `log_std=`; missing keys default to zeros, a single value broadcasts.
GaussianProposal proposal_from_config(const KeyValueConfig& cfg, std::size_t dim);
void write_proposal(KeyValueConfig& cfg, const GaussianProposal& q);

}  // namespace iwpost
