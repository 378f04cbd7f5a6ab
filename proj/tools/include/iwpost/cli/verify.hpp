#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "iwpost/implicit.hpp"

namespace iwpost::cli {

using QewRenderer = std::function<QewRender(const TargetModel&, const GaussianProposal&, std::size_t k, std::size_t S,
                                            const Grid&, RngStream&, std::size_t groups)>;

struct VerifyOptions {
  std::uint64_t seed = 0;
  bool quick = false;
  /// Used by every q_ew field check. Swappable so a broken renderer can be shown to fail.
  QewRenderer renderer = render_qew;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;  // measured values
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool all_passed() const;
  /// One `PASS name: detail` or `FAIL name: detail` line per check, then a summary line.
  /// Contains no timings, so equal inputs give byte-identical text.
  std::string to_text() const;
};

/// Each check draws from its own stream derived from `seed` and its position.
VerifyReport run_verify(const VerifyOptions& options);

}  // namespace iwpost::cli
