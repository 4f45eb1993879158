#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace rsput::cli {

struct PriceCommandOptions {
  std::string out_dir = ".";
  std::optional<int> digits;  ///< overrides outputs.digits from the config
};

struct ConvergeCommandOptions {
  std::string out_dir = ".";
  std::vector<double> h_list;
  double fixed_k = 0.0;
  double horizon = 0.0;
  std::size_t max_threads = 0;  ///< 0: one solve per hardware thread
};

struct CollapseCommandOptions {
  /// When false the regimes are left as configured instead of cloning regime
  /// 0 everywhere; with genuinely distinct regimes the discrepancy check must
  /// then fail, which makes this a negative-control hook for the harness.
  bool clone = true;
};

/// Solves to maturity and writes prices.csv, boundary.csv, steps.csv plus a
/// run_meta.json sidecar into out_dir. Returns the process exit code.
int cmd_price(const RunConfig& config, const PriceCommandOptions& options);

/// Runs the fixed-step refinement study and writes converge.csv plus the
/// sidecar. Returns the process exit code.
int cmd_converge(const RunConfig& config, const ConvergeCommandOptions& options);

/// Clones regime 0 into every regime, solves the multi-regime and the
/// single-regime problems, and reports the maximum discrepancy. Exit 0 iff
/// the discrepancy is at most 1e-8.
int cmd_collapse_check(const RunConfig& config,
                       const CollapseCommandOptions& options);

// Cell formatting shared with the tests so expectations stay in one place.
std::string format_full(double value);               ///< shortest round-trip
std::string format_spot(double value);               ///< "9" -> "9.0"
std::string format_value(double value, int digits);  ///< fixed for 1..16

}  // namespace rsput::cli
