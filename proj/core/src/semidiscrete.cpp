#include "rsput/semidiscrete.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "rsput/hermite.hpp"

namespace rsput {

FieldSet::FieldSet(std::size_t regimes, std::size_t interior, bool with_gamma)
    : regimes_(regimes),
      interior_(interior),
      with_gamma_(with_gamma),
      data_((with_gamma ? 3 : 2) * regimes * interior, 0.0) {}

FieldSet FieldSet::from_state(const SolverState& state) {
  const std::size_t regimes = state.u.size();
  const std::size_t interior = regimes ? state.u[0].size() : 0;
  FieldSet f(regimes, interior, state.with_gamma());
  for (std::size_t m = 0; m < regimes; ++m) {
    std::copy(state.u[m].begin(), state.u[m].end(), f.u(m).begin());
    std::copy(state.w[m].begin(), state.w[m].end(), f.w(m).begin());
    if (state.with_gamma())
      std::copy((*state.y)[m].begin(), (*state.y)[m].end(), f.y(m).begin());
  }
  return f;
}

void FieldSet::write_state(SolverState& state) const {
  for (std::size_t m = 0; m < regimes_; ++m) {
    const auto su = u(m);
    const auto sw = w(m);
    std::copy(su.begin(), su.end(), state.u[m].begin());
    std::copy(sw.begin(), sw.end(), state.w[m].begin());
    if (with_gamma_) {
      const auto sy = y(m);
      std::copy(sy.begin(), sy.end(), (*state.y)[m].begin());
    }
  }
}

RhsContext build_context(std::span<const double> sf,
                         std::span<const double> slopes,
                         const MarketModel& model) {
  const std::size_t regimes = model.regime_count();
  assert(sf.size() == regimes && slopes.size() == regimes);

  RhsContext ctx;
  ctx.sf.assign(sf.begin(), sf.end());
  ctx.slope.assign(slopes.begin(), slopes.end());
  ctx.xi.resize(regimes);
  ctx.u0.resize(regimes);
  ctx.w0.resize(regimes);
  ctx.shift.assign(regimes * regimes, 0.0);
  for (std::size_t m = 0; m < regimes; ++m) {
    const double sigma = model.regimes[m].sigma;
    ctx.xi[m] = model.regimes[m].rate - 0.5 * sigma * sigma + slopes[m] / sf[m];
    ctx.u0[m] = model.strike - sf[m];
    ctx.w0[m] = -sf[m];
    for (std::size_t l = 0; l < regimes; ++l)
      if (l != m) ctx.shift[m * regimes + l] = std::log(sf[m] / sf[l]);
  }
  return ctx;
}

void RhsWorkspace::resize(std::size_t regimes, std::size_t interior,
                          bool with_gamma) {
  d2u.assign(regimes, std::vector<double>(interior, 0.0));
  d2w.assign(regimes, std::vector<double>(interior, 0.0));
  if (with_gamma) d2y.assign(regimes, std::vector<double>(interior, 0.0));
  resampled.assign(interior, 0.0);
}

void rhs(const FieldSet& fields, const RhsContext& ctx,
         const CompactOperator& op, const MarketModel& model, FieldSet& out,
         RhsWorkspace& ws) {
  const std::size_t regimes = fields.regimes();
  const std::size_t n = fields.interior();
  const std::size_t cells = op.cells();
  const double h = op.spacing();
  const bool gamma = fields.with_gamma();
  const auto& gen = model.generator;

  // Derivatives first: the w and y couplings need every regime's compact
  // second derivative as resampling slope data.
  for (std::size_t m = 0; m < regimes; ++m) {
    op.second_derivative(fields.u(m), ctx.u0[m], 0.0, ws.d2u[m]);
    op.second_derivative(fields.w(m), ctx.w0[m], 0.0, ws.d2w[m]);
    if (gamma) op.second_derivative(fields.y(m), ctx.w0[m], 0.0, ws.d2y[m]);
  }

  for (std::size_t m = 0; m < regimes; ++m) {
    const double sigma = model.regimes[m].sigma;
    const double half_s2 = 0.5 * sigma * sigma;
    const double xi = ctx.xi[m];
    // Zero generator row sums let the diagonal reaction fold into the
    // coupling differences below: only the plain discount rate stays here.
    const double react = model.regimes[m].rate;

    const auto um = fields.u(m);
    const auto wm = fields.w(m);
    auto du = out.u(m);
    auto dw = out.w(m);
    for (std::size_t i = 0; i < n; ++i) {
      du[i] = half_s2 * ws.d2u[m][i] + xi * wm[i] - react * um[i];
      dw[i] = half_s2 * ws.d2w[m][i] + xi * ws.d2u[m][i] - react * wm[i];
    }
    if (gamma) {
      const auto ym = fields.y(m);
      auto dy = out.y(m);
      for (std::size_t i = 0; i < n; ++i)
        dy[i] = half_s2 * ws.d2y[m][i] + xi * ws.d2w[m][i] - react * ym[i];
    }

    // Coupling in difference form, q_ml * (resampled_l - own): algebraically
    // the same as the diagonal-plus-offdiagonal grouping, but identical
    // regimes cancel exactly instead of through products of large generator
    // entries (the zero-shift resample reproduces nodal values bitwise).
    for (std::size_t l = 0; l < regimes; ++l) {
      if (l == m) continue;
      const double qml = gen.at(m, l);
      const double delta = ctx.shift[m * regimes + l];
      std::span<double> res{ws.resampled};

      cubic_shift_resample(PaddedField{ctx.u0[l], fields.u(l), 0.0},
                           PaddedField{ctx.w0[l], fields.w(l), 0.0}, cells, h,
                           delta, ExpClosure{model.strike, ctx.sf[l]}, res);
      for (std::size_t i = 0; i < n; ++i) du[i] += qml * (res[i] - um[i]);

      cubic_shift_resample(PaddedField{ctx.w0[l], fields.w(l), 0.0},
                           PaddedField{ctx.w0[l], ws.d2w[l], 0.0}, cells, h,
                           delta, ExpClosure{0.0, ctx.sf[l]}, res);
      for (std::size_t i = 0; i < n; ++i) dw[i] += qml * (res[i] - wm[i]);

      if (gamma) {
        const auto ym = fields.y(m);
        auto dy = out.y(m);
        cubic_shift_resample(PaddedField{ctx.w0[l], fields.y(l), 0.0},
                             PaddedField{ctx.w0[l], ws.d2y[l], 0.0}, cells, h,
                             delta, ExpClosure{0.0, ctx.sf[l]}, res);
        for (std::size_t i = 0; i < n; ++i) dy[i] += qml * (res[i] - ym[i]);
      }
    }
  }
}

}  // namespace rsput
