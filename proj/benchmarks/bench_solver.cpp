#include <benchmark/benchmark.h>

#include <cmath>
#include <cstddef>
#include <vector>

#include <rsput/compact.hpp>
#include <rsput/freeboundary.hpp>
#include <rsput/model.hpp>
#include <rsput/rkf.hpp>
#include <rsput/semidiscrete.hpp>

namespace {

using namespace rsput;

MarketModel two_regime() {
  MarketModel m;
  m.strike = 9.0;
  m.maturity = 1.0;
  m.regimes = {{0.10, 0.80}, {0.05, 0.30}};
  m.generator = {2, {-6.0, 6.0, 9.0, -9.0}};
  return m;
}

/// Mid-solve-like state: boundaries pulled off the strike and smooth fields
/// that keep the sqrt-transform radicand non-negative on every node.
SolverState synthetic_state(const MarketModel& model, const GridSpec& grid) {
  SolverState state = initial_state(model, grid, false);
  state.sf = {7.2, 8.1};
  const double h = grid.h();
  for (std::size_t m = 0; m < model.regime_count(); ++m) {
    const double sf = state.sf[m];
    for (std::size_t i = 1; i < grid.m; ++i) {
      const double x = static_cast<double>(i) * h;
      state.u[m][i - 1] = model.strike - sf * std::exp(x) + sf * 0.1 * x * x;
      state.w[m][i - 1] = -sf * std::exp(x) + 2.0 * sf * 0.1 * x;
    }
  }
  return state;
}

void BM_SecondDerivative(benchmark::State& bench) {
  const std::size_t m = static_cast<std::size_t>(bench.range(0));
  const double h = 3.0 / static_cast<double>(m);
  const CompactOperator op(m, h);
  std::vector<double> values(m - 1);
  for (std::size_t i = 1; i < m; ++i)
    values[i - 1] = std::sin(static_cast<double>(i) * h);
  std::vector<double> out(m - 1);
  for (auto _ : bench) {
    op.second_derivative(values, 0.0, std::sin(3.0), out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_SecondDerivative)->Arg(120)->Arg(240)->Arg(480);

void BM_CoupledRhs(benchmark::State& bench) {
  const std::size_t m = static_cast<std::size_t>(bench.range(0));
  const MarketModel model = two_regime();
  const GridSpec grid{3.0, m};
  const CompactOperator op(grid.m, grid.h());
  const SolverState state = synthetic_state(model, grid);
  const FieldSet fields = FieldSet::from_state(state);
  const std::vector<double> slopes = {-0.4, -0.6};
  const RhsContext ctx = build_context(state.sf, slopes, model);
  FieldSet out(2, grid.interior(), false);
  RhsWorkspace ws;
  ws.resize(2, grid.interior(), false);
  for (auto _ : bench) {
    rhs(fields, ctx, op, model, out, ws);
    benchmark::DoNotOptimize(out.data().data());
  }
}
BENCHMARK(BM_CoupledRhs)->Arg(120)->Arg(240);

void BM_BoundaryStages(benchmark::State& bench) {
  const MarketModel model = two_regime();
  const GridSpec grid{3.0, 240};
  const SolverState state = synthetic_state(model, grid);
  const FieldSnapshot snapshot = make_snapshot(state, model, grid);
  const ExtrapolationWeights weights = ExtrapolationWeights::for_grid(grid, 4);
  for (auto _ : bench) {
    const BoundaryStages stages =
        boundary_stages(state.sf, snapshot, model, grid, weights, 1e-4);
    benchmark::DoNotOptimize(stages.sf5.data());
  }
}
BENCHMARK(BM_BoundaryStages);

void BM_ShortSolve(benchmark::State& bench) {
  const MarketModel model = two_regime();
  const GridSpec grid{3.0, 60};
  SolveOptions opts;
  opts.horizon = 0.1;
  for (auto _ : bench) {
    const SolveResult result = solve(model, grid, StepControlConfig{}, opts);
    benchmark::DoNotOptimize(result.state.sf.data());
  }
}
BENCHMARK(BM_ShortSolve)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
