#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rsput/model.hpp"
#include "rsput/rkf.hpp"

namespace rsput {

/// Queryable snapshot of a solved state: padded node arrays (0..M) for every
/// field plus the slope arrays the cubic interpolants need. Spots map into
/// each regime's own log coordinate through that regime's boundary.
struct PriceSurface {
  double strike = 0.0;
  double h = 0.0;
  std::size_t cells = 0;
  std::vector<double> sf;
  std::vector<std::vector<double>> u;   ///< value, nodes 0..M
  std::vector<std::vector<double>> w;   ///< log-space delta, nodes 0..M
  std::vector<std::vector<double>> dw;  ///< compact second derivative of u
  std::optional<std::vector<std::vector<double>>> y;   ///< log-space gamma
  std::optional<std::vector<std::vector<double>>> dy;  ///< its node slopes

  bool with_gamma() const { return y.has_value(); }
};

PriceSurface build_surface(const SolverState& state, const MarketModel& model,
                           const GridSpec& grid);

/// Option value at an asset price. Exercise region: the payoff. Beyond the
/// far edge: zero. Otherwise cubic Hermite on the bracketing cell.
double price_at(const PriceSurface& surface, std::size_t regime, double spot);

/// Asset-space delta dV/dS = W/S (exactly -1 inside the exercise region).
double delta_at(const PriceSurface& surface, std::size_t regime, double spot);

/// Asset-space gamma d2V/dS2 = (Y - W)/S^2 (zero inside the exercise
/// region). Throws GammaNotComputed if the solve skipped the gamma field.
double gamma_at(const PriceSurface& surface, std::size_t regime, double spot);

/// Log-space field values at x = ln(spot/sf), exposed alongside the
/// asset-space Greeks so both representations are available unambiguously.
double log_delta_at(const PriceSurface& surface, std::size_t regime, double spot);
double log_gamma_at(const PriceSurface& surface, std::size_t regime, double spot);

struct TableRow {
  double spot = 0.0;
  std::vector<double> price;
  std::vector<double> delta;
  std::vector<double> gamma;
};

std::vector<TableRow> table(const PriceSurface& surface,
                            std::span<const double> spots, bool with_greeks);

/// One grid of the fixed-step spatial refinement study. Errors compare a
/// grid against the next finer grid in the sequence at the shared nodes;
/// orders compare consecutive errors. Missing entries are NaN: the last row
/// has no finer partner, the second row has no previous error, and a grid
/// whose boundary closure is infeasible at that resolution (no real slope
/// root, typically the coarsest spacings) contributes NaN to every pair it
/// touches while the rest of the ladder is still evaluated.
struct ConvergenceRow {
  double h = 0.0;
  double err_u = 0.0;
  double order_u = 0.0;
  double err_w = 0.0;
  double order_w = 0.0;
};

/// Runs the refinement study: every grid in h_list (which must halve) is
/// integrated to `horizon` with the fixed step `fixed_k` and adjacent grids
/// are differenced on their common nodes. `xbar_cells` counts cells of the
/// coarsest spacing: the boundary-closure offset is pinned at the same
/// physical point on every grid (cells double as h halves), so the study
/// varies the discretization and nothing else. `max_threads` caps concurrent
/// solves (1 = serial).
std::vector<ConvergenceRow> convergence_study(const MarketModel& model,
                                              double x_max,
                                              std::span<const double> h_list,
                                              double fixed_k, double horizon,
                                              std::size_t xbar_cells,
                                              std::size_t max_threads);

}  // namespace rsput
