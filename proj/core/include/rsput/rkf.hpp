#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rsput/compact.hpp"
#include "rsput/freeboundary.hpp"
#include "rsput/model.hpp"
#include "rsput/semidiscrete.hpp"

namespace rsput {

/// Embedded fifth(fourth)-order explicit pair with six stages. The
/// fifth-order weights are committed; the fourth-order row only feeds the
/// error estimate.
struct ButcherTableau {
  static constexpr std::array<double, 6> c = {0.0,       1.0 / 5.0, 3.0 / 10.0,
                                              3.0 / 5.0, 1.0,       7.0 / 8.0};
  static constexpr std::array<std::array<double, 5>, 6> a = {{
      {0.0, 0.0, 0.0, 0.0, 0.0},
      {1.0 / 5.0, 0.0, 0.0, 0.0, 0.0},
      {3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0},
      {3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0, 0.0, 0.0},
      {-11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0, 0.0},
      {1631.0 / 55296.0, 175.0 / 512.0, 575.0 / 13824.0, 44275.0 / 110592.0,
       253.0 / 4096.0},
  }};
  static constexpr std::array<double, 6> b5 = {
      37.0 / 378.0, 0.0, 250.0 / 621.0, 125.0 / 594.0, 0.0, 512.0 / 1771.0};
  static constexpr std::array<double, 6> b4 = {2825.0 / 27648.0,  0.0,
                                               18575.0 / 48384.0, 13525.0 / 55296.0,
                                               277.0 / 14336.0,   1.0 / 4.0};

  /// max |sum(b) - 1| over both weight rows; checked at solve start.
  static double weight_sum_defect();
};

/// Result of advancing the boundary sub-system through the six stages with
/// field data frozen at the step entry. Stage boundary values and slopes are
/// kept so the field stages can optionally couple to them.
struct BoundaryStages {
  std::array<std::vector<double>, 6> stage_sf;
  std::array<std::vector<double>, 6> stage_slope;
  std::vector<double> sf5;
  std::vector<double> sf4;
};

/// Throws StepRejection when any stage's slope closure fails.
BoundaryStages boundary_stages(std::span<const double> sf,
                               const FieldSnapshot& snapshot,
                               const MarketModel& model, const GridSpec& grid,
                               const ExtrapolationWeights& weights, double k);

/// One attempted step of the stepper.
struct StepRecord {
  double t = 0.0;       ///< time level the attempt started from
  double k = 0.0;       ///< step size attempted
  double e_u = 0.0;     ///< error estimate (NaN if the slope guard tripped)
  bool accepted = false;
};

struct TrajectoryPoint {
  double tau = 0.0;
  std::vector<double> sf;
};

struct SolveResult {
  SolverState state;
  std::vector<TrajectoryPoint> trajectory;  ///< boundary after every accepted step
  std::vector<StepRecord> steps;            ///< every attempt, in order
};

struct SolveOptions {
  bool with_gamma = false;
  /// Integrate to this time instead of the model maturity (must not exceed it).
  std::optional<double> horizon;
  /// Fixed step size; disables the error controller (every step commits the
  /// fifth-order candidate).
  std::optional<double> fixed_dt;
};

/// Error estimate and step-size proposal for one attempted step.
struct StepDecision {
  double e_u = 0.0;
  bool accepted = false;
  double k_next = 0.0;
};

StepDecision error_and_propose(const FieldSet& c5, const FieldSet& c4,
                               double k, const StepControlConfig& cfg);

/// Integrates the coupled system from the payoff state to the horizon.
SolveResult solve(const MarketModel& model, const GridSpec& grid,
                  const StepControlConfig& cfg, const SolveOptions& opts);

inline SolveResult solve(const MarketModel& model, const GridSpec& grid,
                         const StepControlConfig& cfg, bool with_gamma = false) {
  return solve(model, grid, cfg, SolveOptions{with_gamma, {}, {}});
}

}  // namespace rsput
