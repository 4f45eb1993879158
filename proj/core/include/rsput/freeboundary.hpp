#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rsput/model.hpp"

namespace rsput {

/// Weights of the one-sided boundary extrapolation identity
///
///   a1*Q(xb) + a2*Q(2 xb) + a3*Q(3 xb)
///     = b1*xb*Q'(0) + b2*xb^2*Q''(0) + b3*xb^3*Q'''(0) + O(xb^6)
///
/// for any smooth Q with Q(0) = 0. The a-weights annihilate the fourth- and
/// fifth-order Taylor moments; the b-weights are the surviving first three
/// moments (see the moment checks in the test suite).
struct ExtrapolationWeights {
  double a1 = 81.0;
  double a2 = -81.0 / 8.0;
  double a3 = 1.0;
  double b1 = 255.0 / 4.0;
  double b2 = 99.0 / 4.0;
  double b3 = 9.0 / 2.0;
  std::size_t xbar_cells = 4;
  double xbar = 0.0;  ///< stencil offset xbar_cells * h

  static ExtrapolationWeights for_grid(const GridSpec& grid,
                                       std::size_t xbar_cells);
};

/// Frozen per-regime node data (value and slope at nodes 0..M) used while the
/// boundary sub-system is advanced inside one step. The boundary node carries
/// the Dirichlet closures of the state the snapshot was taken from.
struct FieldSnapshot {
  std::vector<std::vector<double>> u_nodes;  ///< per regime, size M+1
  std::vector<std::vector<double>> w_nodes;  ///< per regime, size M+1
};

FieldSnapshot make_snapshot(const SolverState& state, const MarketModel& model,
                            const GridSpec& grid);

/// Foreign-regime data entering one regime's boundary dynamics: value, first
/// and second derivative of every other regime's field at the point that
/// shares the asset price with this regime's boundary. The own-regime slot is
/// unused and left zero.
struct BoundaryCoupling {
  std::vector<double> value;
  std::vector<double> d1;
  std::vector<double> d2;
};

/// Evaluates the coupling for regime m at boundary locations `sf` (which may
/// be intermediate stage values) against the frozen snapshot. Points at or
/// below the foreign boundary use the exercise-region closure, points at or
/// beyond x_max are zero, and interior points use a quintic Hermite patch on
/// the three nearest nodes.
BoundaryCoupling boundary_coupling(std::size_t m, std::span<const double> sf,
                                   const FieldSnapshot& snapshot,
                                   const MarketModel& model,
                                   const GridSpec& grid);

/// First derivative of the sqrt-transformed field at the boundary. Throws
/// StepRejection(degenerate_sqrt_argument) when the radicand falls below
/// 1e-12 * strike.
double q_prime0(std::size_t m, double sf_m, const BoundaryCoupling& coupling,
                const MarketModel& model);

/// Coefficients of the quadratic qa*s'^2 + qb*s' + qc = 0 satisfied by the
/// boundary slope.
struct QuadraticCoeffs {
  double qa = 0.0;
  double qb = 0.0;
  double qc = 0.0;
};

/// Assembles the slope quadratic by eliminating the boundary derivatives of
/// the sqrt-transformed field from the extrapolation identity. u_nodes_m is
/// the padded node array for regime m (the stencil reads exact grid values).
/// Throws StepRejection(negative_radicand) if a stencil value leaves the
/// domain of the sqrt transform.
QuadraticCoeffs quadratic_coeffs(std::size_t m, double sf_m,
                                 std::span<const double> u_nodes_m, double q1,
                                 const BoundaryCoupling& coupling,
                                 const ExtrapolationWeights& weights,
                                 const MarketModel& model);

/// Negative root branch of the slope quadratic. Throws
/// StepRejection(complex_root) when the discriminant is negative.
double boundary_slope(const QuadraticCoeffs& coeffs, std::size_t regime);

/// Boundary slopes of every regime at once: couplings, sqrt-transform
/// derivatives, slope quadratics, root selection. Coupling points that land
/// exactly on a foreign boundary (every pair at expiry, identical regimes
/// throughout) take the foreign curvature from the continuation side of the
/// seam, which the pairwise coupling alone cannot know; use this entry point
/// rather than assembling the pieces by hand.
std::vector<double> boundary_slopes(std::span<const double> sf,
                                    const FieldSnapshot& snapshot,
                                    const MarketModel& model,
                                    const GridSpec& grid,
                                    const ExtrapolationWeights& weights);

}  // namespace rsput
