#include "rsput/hermite.hpp"

#include <string>

namespace rsput {

QuinticPatch quintic_fit(double x0, double h, const std::array<double, 3>& u,
                         const std::array<double, 3>& w) {
  // Divided-difference table for the repeated-node sequence
  // (x0, x0, x1, x1, x2, x2); repeated nodes consume the slope data.
  const double f01 = (u[1] - u[0]) / h;
  const double f12 = (u[2] - u[1]) / h;

  const double c2 = (f01 - w[0]) / h;        // f[x0,x0,x1]
  const double d1 = (w[1] - f01) / h;        // f[x0,x1,x1]
  const double d2 = (f12 - w[1]) / h;        // f[x1,x1,x2]
  const double d3 = (w[2] - f12) / h;        // f[x1,x2,x2]

  const double c3 = (d1 - c2) / h;           // f[x0,x0,x1,x1]
  const double e1 = (d2 - d1) / (2.0 * h);   // f[x0,x1,x1,x2]
  const double e2 = (d3 - d2) / h;           // f[x1,x1,x2,x2]

  const double c4 = (e1 - c3) / (2.0 * h);   // f[x0,x0,x1,x1,x2]
  const double e3 = (e2 - e1) / (2.0 * h);   // f[x0,x1,x1,x2,x2]

  const double c5 = (e3 - c4) / (2.0 * h);   // f[x0,x0,x1,x1,x2,x2]

  return QuinticPatch{x0, h, {u[0], w[0], c2, c3, c4, c5}};
}

Eval012 quintic_eval012(const QuinticPatch& patch, double x) {
  const double lo = patch.x0;
  const double hi = patch.x0 + 2.0 * patch.h;
  const double slack = 1e-12 * (std::abs(lo) + std::abs(hi) + 1.0);
  if (x < lo - slack || x > hi + slack)
    throw OutOfSpan("quintic patch queried at " + std::to_string(x) +
                    " outside [" + std::to_string(lo) + ", " +
                    std::to_string(hi) + "]");

  // Newton-basis nodes with multiplicity: (x0, x0, x1, x1, x2).
  const std::array<double, 5> z = {patch.x0, patch.x0, patch.x0 + patch.h,
                                   patch.x0 + patch.h, patch.x0 + 2.0 * patch.h};
  double p = patch.alpha[5];
  double dp = 0.0;
  double ddp = 0.0;
  for (std::size_t k = 5; k-- > 0;) {
    const double d = x - z[k];
    ddp = ddp * d + 2.0 * dp;
    dp = dp * d + p;
    p = p * d + patch.alpha[k];
  }
  return Eval012{p, dp, ddp};
}

}  // namespace rsput
