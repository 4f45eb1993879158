#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rsput/compact.hpp"
#include "rsput/model.hpp"

namespace rsput {

/// Flat storage for every evolved field of every regime, so Runge-Kutta
/// stage combinations are plain loops over one contiguous buffer. Layout:
/// all u blocks, then all w blocks, then (optionally) all y blocks, each
/// regime-major.
class FieldSet {
 public:
  FieldSet() = default;
  FieldSet(std::size_t regimes, std::size_t interior, bool with_gamma);

  std::size_t regimes() const { return regimes_; }
  std::size_t interior() const { return interior_; }
  bool with_gamma() const { return with_gamma_; }

  std::span<double> u(std::size_t m) { return block(0, m); }
  std::span<double> w(std::size_t m) { return block(1, m); }
  std::span<double> y(std::size_t m) { return block(2, m); }
  std::span<const double> u(std::size_t m) const { return block(0, m); }
  std::span<const double> w(std::size_t m) const { return block(1, m); }
  std::span<const double> y(std::size_t m) const { return block(2, m); }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  static FieldSet from_state(const SolverState& state);
  void write_state(SolverState& state) const;

 private:
  std::span<double> block(std::size_t field, std::size_t m) {
    return {data_.data() + (field * regimes_ + m) * interior_, interior_};
  }
  std::span<const double> block(std::size_t field, std::size_t m) const {
    return {data_.data() + (field * regimes_ + m) * interior_, interior_};
  }

  std::size_t regimes_ = 0;
  std::size_t interior_ = 0;
  bool with_gamma_ = false;
  std::vector<double> data_;
};

/// Everything the right-hand side needs besides the evolved fields, frozen
/// over one step: boundary locations and slopes at the step entry, the
/// resulting convection coefficients, Dirichlet values, and the cross-regime
/// resampling shifts.
struct RhsContext {
  std::vector<double> sf;     ///< boundary per regime
  std::vector<double> slope;  ///< boundary slope per regime
  std::vector<double> xi;     ///< r - sigma^2/2 + s'/s per regime
  std::vector<double> u0;     ///< Dirichlet value of u at x=0 (strike - sf)
  std::vector<double> w0;     ///< Dirichlet value of w and y at x=0 (-sf)
  std::vector<double> shift;  ///< ln(sf_m / sf_l), row-major regimes x regimes
};

RhsContext build_context(std::span<const double> sf,
                         std::span<const double> slopes,
                         const MarketModel& model);

/// Scratch buffers reused across right-hand-side evaluations.
struct RhsWorkspace {
  std::vector<std::vector<double>> d2u, d2w, d2y;
  std::vector<double> resampled;

  void resize(std::size_t regimes, std::size_t interior, bool with_gamma);
};

/// Coupled semidiscrete right-hand side for all regimes and fields:
///
///   du = s2/2 D2u + xi w - r u + sum_{l!=m} qml (u_l~ - u)
///   dw = s2/2 D2w + xi D2u - r w + sum_{l!=m} qml (w_l~ - w)
///   dy = s2/2 D2y + xi D2w - r y + sum_{l!=m} qml (y_l~ - y)
///
/// The zero row sums of the generator fold the diagonal entry into the
/// coupling differences (qmm u + sum qml u_l~ = sum qml (u_l~ - u)), so
/// identical regimes decouple exactly. Tilded fields are the foreign fields
/// resampled at this regime's nodes using the frozen shifts; points inside a
/// foreign exercise region use the payoff closure, points beyond the far
/// edge are zero.
void rhs(const FieldSet& fields, const RhsContext& ctx,
         const CompactOperator& op, const MarketModel& model, FieldSet& out,
         RhsWorkspace& ws);

}  // namespace rsput
