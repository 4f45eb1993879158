#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rsput {

/// Raised while a time step is being assembled when the boundary-slope
/// closure cannot produce a usable real slope for some regime. The stepper
/// reacts by shrinking the step and retrying; it never escapes a solve unless
/// the step size collapses entirely.
class StepRejection : public std::runtime_error {
 public:
  enum class Reason {
    complex_root,             ///< slope quadratic has no real root
    degenerate_sqrt_argument, ///< boundary derivative radicand fell below floor
    negative_radicand,        ///< sqrt-transform of a grid value went negative
  };

  StepRejection(Reason reason, std::size_t regime)
      : std::runtime_error(describe(reason, regime)),
        reason_(reason),
        regime_(regime) {}

  Reason reason() const noexcept { return reason_; }
  std::size_t regime() const noexcept { return regime_; }

 private:
  static std::string describe(Reason reason, std::size_t regime);

  Reason reason_;
  std::size_t regime_;
};

/// The adaptive controller shrank the step below the resolvable floor
/// (1e-14 of the horizon) without producing an acceptable step.
class StepStalled : public std::runtime_error {
 public:
  StepStalled(double tau, double k)
      : std::runtime_error("step size stalled at tau=" + std::to_string(tau) +
                           " (k=" + std::to_string(k) + ")"),
        tau_(tau),
        k_(k) {}

  double tau() const noexcept { return tau_; }
  double k() const noexcept { return k_; }

 private:
  double tau_;
  double k_;
};

/// Grid has too few interior nodes for the one-sided operator rows or the
/// boundary extrapolation stencil.
class GridTooSmall : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A gamma query was made against a solve that did not evolve the gamma field.
class GammaNotComputed : public std::logic_error {
 public:
  GammaNotComputed() : std::logic_error("gamma field was not computed in this solve") {}
};

/// Quintic patch evaluation outside the fitted span; the patch never
/// extrapolates.
class OutOfSpan : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace rsput
