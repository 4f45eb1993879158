#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace rsput {

/// Per-regime market parameters.
struct RegimeParams {
  double rate = 0.0;   ///< risk-free rate while the chain sits in this regime
  double sigma = 0.0;  ///< volatility while the chain sits in this regime

  bool operator==(const RegimeParams&) const = default;
};

/// Generator of the modulating Markov chain, row-major. Diagonal entries are
/// non-positive, off-diagonal entries non-negative, rows sum to zero.
struct GeneratorMatrix {
  std::size_t dim = 0;
  std::vector<double> entries;  ///< dim*dim, row-major

  double at(std::size_t row, std::size_t col) const {
    return entries[row * dim + col];
  }

  bool operator==(const GeneratorMatrix&) const = default;
};

/// Complete problem description: one American put under regime switching.
struct MarketModel {
  double strike = 0.0;
  double maturity = 0.0;
  std::vector<RegimeParams> regimes;
  GeneratorMatrix generator;

  std::size_t regime_count() const { return regimes.size(); }

  bool operator==(const MarketModel&) const = default;
};

/// Uniform log-space grid on [0, x_max] with M cells (M+1 nodes). The
/// interior unknowns live at nodes 1..M-1.
struct GridSpec {
  double x_max = 3.0;
  std::size_t m = 240;

  double h() const { return x_max / static_cast<double>(m); }
  std::size_t interior() const { return m - 1; }

  bool operator==(const GridSpec&) const = default;
};

/// Adaptive step controller knobs. The two exponents follow the solver's
/// native convention (1/4 after an accepted step, 1/5 after a rejected one);
/// `standard_controller` swaps them for the textbook embedded-pair rule.
struct StepControlConfig {
  double tol = 1e-6;       ///< infinity-norm tolerance on the value field
  double safety = 0.9;     ///< multiplier in the step-size proposal
  double phi = 0.5;        ///< shrink factor when the slope root guard trips
  double accept_exponent = 0.25;
  double reject_exponent = 0.2;
  std::optional<double> initial_dt;  ///< empty: h^2
  std::size_t xbar_cells = 4;        ///< boundary stencil offset in cells
  bool standard_controller = false;
  /// Feed per-stage boundary values (Dirichlet data, convection coefficient,
  /// resample shifts) into the field stages. Off, the field stages reuse the
  /// step-entry boundary snapshot, which decouples the embedded error
  /// estimate from the boundary dynamics: the controller then equilibrates
  /// on smooth field error while the boundary drifts. Keep this on for
  /// production runs; the frozen variant exists for step-control studies.
  bool stage_coupled_boundary = true;

  bool operator==(const StepControlConfig&) const = default;
};

/// Full semidiscrete state at one time level. Fields are stored at the
/// interior nodes only; boundary values are implied by sf.
struct SolverState {
  double tau = 0.0;
  std::vector<double> sf;                 ///< exercise boundary per regime
  std::vector<std::vector<double>> u;     ///< value field per regime
  std::vector<std::vector<double>> w;     ///< log-space delta field per regime
  std::optional<std::vector<std::vector<double>>> y;  ///< log-space gamma field

  bool with_gamma() const { return y.has_value(); }
};

/// One violated model invariant: which field and which rule.
struct Violation {
  std::string field;
  std::string rule;
};

/// Checks every model invariant; an empty result means the model is usable.
std::vector<Violation> validate(const MarketModel& model);

/// Throws std::invalid_argument listing all violations if the model is bad.
void ensure_valid(const MarketModel& model);

/// Payoff-consistent state at tau = 0: all fields zero, boundary at the
/// strike.
SolverState initial_state(const MarketModel& model, const GridSpec& grid,
                          bool with_gamma);

}  // namespace rsput
