#include "rsput/rkf.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "rsput/errors.hpp"

namespace rsput {

namespace {

constexpr double kGrowthCap = 5.0;
constexpr double kShrinkFloor = 0.1;
constexpr double kStallFraction = 1e-14;

std::vector<double> slopes_at(std::span<const double> sf,
                              const FieldSnapshot& snapshot,
                              const MarketModel& model, const GridSpec& grid,
                              const ExtrapolationWeights& weights) {
  return boundary_slopes(sf, snapshot, model, grid, weights);
}

struct StepWorkspace {
  std::array<FieldSet, 6> stage_k;
  FieldSet stage_arg;
  FieldSet cand5;
  FieldSet cand4;
  RhsWorkspace rhs_ws;

  StepWorkspace(std::size_t regimes, std::size_t interior, bool with_gamma) {
    for (auto& f : stage_k) f = FieldSet(regimes, interior, with_gamma);
    stage_arg = FieldSet(regimes, interior, with_gamma);
    cand5 = FieldSet(regimes, interior, with_gamma);
    cand4 = FieldSet(regimes, interior, with_gamma);
    rhs_ws.resize(regimes, interior, with_gamma);
  }
};

void field_stages(const FieldSet& base,
                  std::span<const RhsContext> stage_ctx,
                  const CompactOperator& op, const MarketModel& model,
                  double k, StepWorkspace& ws) {
  const std::size_t len = base.data().size();

  for (std::size_t s = 0; s < 6; ++s) {
    const double* src = base.data().data();
    double* arg = ws.stage_arg.data().data();
    std::copy(src, src + len, arg);
    for (std::size_t j = 0; j < s; ++j) {
      const double a = ButcherTableau::a[s][j];
      if (a == 0.0) continue;
      const double* kj = ws.stage_k[j].data().data();
      for (std::size_t i = 0; i < len; ++i) arg[i] += k * a * kj[i];
    }
    const RhsContext& ctx = stage_ctx.size() == 1 ? stage_ctx[0] : stage_ctx[s];
    rhs(ws.stage_arg, ctx, op, model, ws.stage_k[s], ws.rhs_ws);
  }

  double* c5 = ws.cand5.data().data();
  double* c4 = ws.cand4.data().data();
  const double* src = base.data().data();
  std::copy(src, src + len, c5);
  std::copy(src, src + len, c4);
  for (std::size_t s = 0; s < 6; ++s) {
    const double b5 = ButcherTableau::b5[s];
    const double b4 = ButcherTableau::b4[s];
    const double* ks = ws.stage_k[s].data().data();
    if (b5 != 0.0)
      for (std::size_t i = 0; i < len; ++i) c5[i] += k * b5 * ks[i];
    if (b4 != 0.0)
      for (std::size_t i = 0; i < len; ++i) c4[i] += k * b4 * ks[i];
  }
}

}  // namespace

double ButcherTableau::weight_sum_defect() {
  double s5 = 0.0;
  double s4 = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    s5 += b5[i];
    s4 += b4[i];
  }
  return std::max(std::abs(s5 - 1.0), std::abs(s4 - 1.0));
}

BoundaryStages boundary_stages(std::span<const double> sf,
                               const FieldSnapshot& snapshot,
                               const MarketModel& model, const GridSpec& grid,
                               const ExtrapolationWeights& weights, double k) {
  const std::size_t regimes = model.regime_count();
  BoundaryStages out;

  std::array<std::vector<double>, 6> r;  // k * slope, per stage
  for (std::size_t s = 0; s < 6; ++s) {
    auto& stage_sf = out.stage_sf[s];
    stage_sf.assign(sf.begin(), sf.end());
    for (std::size_t j = 0; j < s; ++j) {
      const double a = ButcherTableau::a[s][j];
      if (a == 0.0) continue;
      for (std::size_t m = 0; m < regimes; ++m) stage_sf[m] += a * r[j][m];
    }
    out.stage_slope[s] = slopes_at(stage_sf, snapshot, model, grid, weights);
    r[s].resize(regimes);
    for (std::size_t m = 0; m < regimes; ++m)
      r[s][m] = k * out.stage_slope[s][m];
  }

  out.sf5.assign(sf.begin(), sf.end());
  out.sf4.assign(sf.begin(), sf.end());
  for (std::size_t s = 0; s < 6; ++s)
    for (std::size_t m = 0; m < regimes; ++m) {
      out.sf5[m] += ButcherTableau::b5[s] * r[s][m];
      out.sf4[m] += ButcherTableau::b4[s] * r[s][m];
    }
  return out;
}

StepDecision error_and_propose(const FieldSet& c5, const FieldSet& c4,
                               double k, const StepControlConfig& cfg) {
  double e_u = 0.0;
  for (std::size_t m = 0; m < c5.regimes(); ++m) {
    const auto u5 = c5.u(m);
    const auto u4 = c4.u(m);
    for (std::size_t i = 0; i < u5.size(); ++i)
      e_u = std::max(e_u, std::abs(u5[i] - u4[i]));
  }

  StepDecision d;
  d.e_u = e_u;
  d.accepted = e_u < cfg.tol;

  double factor;
  if (e_u == 0.0) {
    factor = kGrowthCap;
  } else {
    double exponent = d.accepted ? cfg.accept_exponent : cfg.reject_exponent;
    if (cfg.standard_controller)
      exponent = d.accepted ? cfg.reject_exponent : cfg.accept_exponent;
    factor = cfg.safety * std::pow(cfg.tol / e_u, exponent);
    factor = std::clamp(factor, kShrinkFloor, kGrowthCap);
  }
  d.k_next = factor * k;
  return d;
}

SolveResult solve(const MarketModel& model, const GridSpec& grid,
                  const StepControlConfig& cfg, const SolveOptions& opts) {
  ensure_valid(model);
  if (ButcherTableau::weight_sum_defect() > 1e-15)
    throw std::logic_error("tableau weights do not sum to one");
  if (3 * cfg.xbar_cells > grid.interior())
    throw GridTooSmall("extrapolation stencil reaches node " +
                       std::to_string(3 * cfg.xbar_cells) + " but the grid has " +
                       std::to_string(grid.interior()) + " interior nodes");

  const double horizon = opts.horizon.value_or(model.maturity);
  if (horizon > model.maturity || horizon < 0.0)
    throw std::invalid_argument("horizon must lie in [0, maturity]");

  const CompactOperator op(grid.m, grid.h());
  const ExtrapolationWeights weights =
      ExtrapolationWeights::for_grid(grid, cfg.xbar_cells);
  const std::size_t regimes = model.regime_count();
  const std::size_t n = grid.interior();

  SolveResult result;
  result.state = initial_state(model, grid, opts.with_gamma);
  result.trajectory.push_back({0.0, result.state.sf});
  if (horizon == 0.0) return result;

  StepWorkspace ws(regimes, n, opts.with_gamma);
  FieldSet fields = FieldSet::from_state(result.state);
  SolverState probe = result.state;  // scratch for the commit guard

  const double h = grid.h();
  double k = opts.fixed_dt.value_or(cfg.initial_dt.value_or(h * h));
  if (!(k > 0.0)) throw std::invalid_argument("initial step must be positive");
  const double k_floor = kStallFraction * horizon;
  const bool fixed = opts.fixed_dt.has_value();

  double tau = 0.0;
  while (tau < horizon) {
    bool clamped = false;
    if (k >= horizon - tau) {
      k = horizon - tau;
      clamped = true;
    }

    const FieldSnapshot snapshot = make_snapshot(result.state, model, grid);

    // Slope guard: shrink until all six boundary stages produce real slopes.
    BoundaryStages bst;
    for (;;) {
      try {
        bst = boundary_stages(result.state.sf, snapshot, model, grid, weights, k);
        break;
      } catch (const StepRejection&) {
        if (fixed) throw;
        result.steps.push_back(
            {tau, k, std::numeric_limits<double>::quiet_NaN(), false});
        k *= cfg.phi;
        clamped = false;
        if (k < k_floor) throw StepStalled(tau, k);
      }
    }

    std::vector<RhsContext> ctxs;
    if (cfg.stage_coupled_boundary) {
      ctxs.reserve(6);
      for (std::size_t s = 0; s < 6; ++s)
        ctxs.push_back(
            build_context(bst.stage_sf[s], bst.stage_slope[s], model));
    } else {
      ctxs.push_back(
          build_context(result.state.sf, bst.stage_slope[0], model));
    }

    field_stages(fields, ctxs, op, model, k, ws);

    StepDecision dec = error_and_propose(ws.cand5, ws.cand4, k, cfg);
    if (fixed) {
      dec.accepted = true;
      dec.k_next = *opts.fixed_dt;
    }

    // Commit guard: the candidate state must itself admit real boundary
    // slopes.  Otherwise the next step's stage-zero closure would reject
    // every trial size, since it depends only on the committed state.  The
    // boundary ODE keeps its own square-root argument positive by steepening
    // as the argument shrinks, so a smaller step lands back inside the
    // admissible region; treat the overshoot as an ordinary rejection.
    if (dec.accepted && !fixed) {
      ws.cand5.write_state(probe);
      probe.sf = bst.sf5;
      try {
        slopes_at(probe.sf, make_snapshot(probe, model, grid), model, grid,
                  weights);
      } catch (const StepRejection&) {
        dec.accepted = false;
        dec.e_u = std::numeric_limits<double>::quiet_NaN();
        dec.k_next = cfg.phi * k;
      }
    }
    result.steps.push_back({tau, k, dec.e_u, dec.accepted});

    if (!dec.accepted) {
      k = dec.k_next;
      if (k < k_floor) throw StepStalled(tau, k);
      continue;
    }

    const double tau_next = clamped ? horizon : tau + k;
    if (tau_next == tau) throw StepStalled(tau, k);
    tau = tau_next;

    fields.data().swap(ws.cand5.data());
    fields.write_state(result.state);
    result.state.sf = bst.sf5;
    result.state.tau = tau;
    result.trajectory.push_back({tau, result.state.sf});
    k = dec.k_next;
  }
  return result;
}

}  // namespace rsput
