#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>

#include "rsput/errors.hpp"

namespace rsput {

/// View of a grid field padded with its boundary closures: node 0 carries the
/// Dirichlet value, nodes 1..M-1 the interior samples, node M and beyond the
/// far-field constant.
struct PaddedField {
  double boundary = 0.0;
  std::span<const double> interior;
  double far = 0.0;

  double operator[](std::size_t node) const {
    if (node == 0) return boundary;
    if (node <= interior.size()) return interior[node - 1];
    return far;
  }
};

/// Exponential boundary closure `offset - scale * exp(x)`; the analytic form
/// every field takes inside the exercise region.
struct ExpClosure {
  double offset = 0.0;
  double scale = 0.0;

  double operator()(double x) const { return offset - scale * std::exp(x); }
};

/// Quintic Hermite patch over three consecutive nodes (x0, x0+h, x0+2h) in
/// Newton form; alpha are the divided differences for the repeated-node
/// sequence (x0, x0, x1, x1, x2, x2).
struct QuinticPatch {
  double x0 = 0.0;
  double h = 0.0;
  std::array<double, 6> alpha{};
};

/// Value and first two derivatives of a patch at one point.
struct Eval012 {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// Fits the unique quintic matching value and slope at the three nodes.
QuinticPatch quintic_fit(double x0, double h, const std::array<double, 3>& u,
                         const std::array<double, 3>& w);

/// Evaluates the patch and its first two derivatives. x must lie within
/// [x0, x0+2h]; the patch refuses to extrapolate (throws OutOfSpan).
Eval012 quintic_eval012(const QuinticPatch& patch, double x);

/// Resamples a C^1 grid field at every interior node shifted by a constant
/// offset. Positions at or left of the boundary use the analytic closure,
/// positions at or beyond x_max = m*h return the far-field zero, and interior
/// positions use the cubic Hermite of the bracketing node pair. Because the
/// shift is uniform, the fractional cell offset is shared by every node and
/// the whole pass is O(m).
template <class LeftClosure>
void cubic_shift_resample(const PaddedField& values, const PaddedField& slopes,
                          std::size_t m, double h, double shift,
                          LeftClosure&& left_closure, std::span<double> out) {
  const double cells = shift / h;
  const double floor_cells = std::floor(cells);
  const long c0 = static_cast<long>(floor_cells);
  const double theta = cells - floor_cells;  // in [0, 1)

  const double t2 = theta * theta;
  const double t3 = t2 * theta;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + theta;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;

  const double m_cells = static_cast<double>(m);
  for (std::size_t i = 1; i < m; ++i) {
    const double pos_cells = static_cast<double>(i) + cells;
    double r;
    if (pos_cells <= 0.0) {
      r = left_closure(pos_cells * h);
    } else if (pos_cells >= m_cells) {
      r = values.far;
    } else {
      const std::size_t c = static_cast<std::size_t>(static_cast<long>(i) + c0);
      r = h00 * values[c] + h01 * values[c + 1] +
          h * (h10 * slopes[c] + h11 * slopes[c + 1]);
    }
    out[i - 1] = r;
  }
}

}  // namespace rsput
