#include <doctest.h>

#include <array>
#include <cmath>
#include <rsput/errors.hpp>
#include <rsput/rkf.hpp>
#include <vector>

#include "fixtures.hpp"

using namespace rsput;

namespace {

double entry(std::size_t i, std::size_t j) {
  if (j >= i || j >= 5) return 0.0;
  return ButcherTableau::a[i][j];
}

std::array<double, 6> stage_vector(const std::array<double, 6>& v) {
  std::array<double, 6> out{};
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) out[i] += entry(i, j) * v[j];
  return out;
}

double weighted(const std::array<double, 6>& b, const std::array<double, 6>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < 6; ++i) s += b[i] * v[i];
  return s;
}

std::array<double, 6> pow_c(int p) {
  std::array<double, 6> out{};
  for (std::size_t i = 0; i < 6; ++i) out[i] = std::pow(ButcherTableau::c[i], p);
  return out;
}

std::array<double, 6> hadamard(const std::array<double, 6>& a,
                               const std::array<double, 6>& b) {
  std::array<double, 6> out{};
  for (std::size_t i = 0; i < 6; ++i) out[i] = a[i] * b[i];
  return out;
}

SolverState synthetic_state(const MarketModel& model, const GridSpec& grid,
                            std::vector<double> sf, double c) {
  SolverState st = initial_state(model, grid, false);
  st.tau = 0.05;
  st.sf = std::move(sf);
  const double h = grid.h();
  for (std::size_t l = 0; l < model.regime_count(); ++l) {
    for (std::size_t i = 1; i < grid.m; ++i) {
      const double x = static_cast<double>(i) * h;
      st.u[l][i - 1] =
          model.strike - st.sf[l] * std::exp(x) + st.sf[l] * c * x * x;
      st.w[l][i - 1] = -st.sf[l] * std::exp(x) + 2.0 * st.sf[l] * c * x;
    }
  }
  return st;
}

}  // namespace

TEST_CASE("stage abscissae equal the row sums") {
  for (std::size_t i = 0; i < 6; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < 6; ++j) row += entry(i, j);
    CHECK(row == doctest::Approx(ButcherTableau::c[i]).epsilon(1e-14).scale(1.0));
  }
  CHECK(ButcherTableau::weight_sum_defect() <= 1e-15);
}

TEST_CASE("committed weights satisfy every fifth-order condition") {
  const auto& b = ButcherTableau::b5;
  const auto c1 = pow_c(1);
  const auto c2 = pow_c(2);
  const auto c3 = pow_c(3);
  const auto c4 = pow_c(4);
  const auto Ac = stage_vector(c1);
  const auto Ac2 = stage_vector(c2);
  const auto Ac3 = stage_vector(c3);
  const auto AAc = stage_vector(Ac);
  const auto AcAc = stage_vector(hadamard(c1, Ac));
  const auto AAc2 = stage_vector(Ac2);
  const auto AAAc = stage_vector(AAc);

  auto check = [&](double got, double expect) {
    CHECK(got == doctest::Approx(expect).epsilon(1e-12).scale(1.0));
  };
  // order 1..3
  check(weighted(b, pow_c(0)), 1.0);
  check(weighted(b, c1), 1.0 / 2.0);
  check(weighted(b, c2), 1.0 / 3.0);
  check(weighted(b, Ac), 1.0 / 6.0);
  // order 4
  check(weighted(b, c3), 1.0 / 4.0);
  check(weighted(b, hadamard(c1, Ac)), 1.0 / 8.0);
  check(weighted(b, Ac2), 1.0 / 12.0);
  check(weighted(b, AAc), 1.0 / 24.0);
  // order 5
  check(weighted(b, c4), 1.0 / 5.0);
  check(weighted(b, hadamard(c2, Ac)), 1.0 / 10.0);
  check(weighted(b, hadamard(Ac, Ac)), 1.0 / 20.0);
  check(weighted(b, hadamard(c1, Ac2)), 1.0 / 15.0);
  check(weighted(b, Ac3), 1.0 / 20.0);
  check(weighted(b, hadamard(c1, AAc)), 1.0 / 30.0);
  check(weighted(b, AcAc), 1.0 / 40.0);
  check(weighted(b, AAc2), 1.0 / 60.0);
  check(weighted(b, AAAc), 1.0 / 120.0);
}

TEST_CASE("embedded weights are fourth order and see the fifth-order term") {
  const auto& b = ButcherTableau::b4;
  const auto c1 = pow_c(1);
  const auto Ac = stage_vector(c1);

  auto check = [&](double got, double expect) {
    CHECK(got == doctest::Approx(expect).epsilon(1e-12).scale(1.0));
  };
  check(weighted(b, pow_c(0)), 1.0);
  check(weighted(b, c1), 1.0 / 2.0);
  check(weighted(b, pow_c(2)), 1.0 / 3.0);
  check(weighted(b, Ac), 1.0 / 6.0);
  check(weighted(b, pow_c(3)), 1.0 / 4.0);
  check(weighted(b, hadamard(c1, Ac)), 1.0 / 8.0);
  check(weighted(b, stage_vector(pow_c(2))), 1.0 / 12.0);
  check(weighted(b, stage_vector(Ac)), 1.0 / 24.0);
  // The pair differs at fifth order, otherwise the estimate would be blind.
  CHECK(std::abs(weighted(b, pow_c(4)) - 1.0 / 5.0) > 1e-4);
}

TEST_CASE("error estimate reads the value field only") {
  FieldSet c5(1, 4, false), c4(1, 4, false);
  for (std::size_t i = 0; i < 4; ++i) {
    c5.w(0)[i] = 100.0;  // huge slope-field difference must be ignored
    c4.w(0)[i] = -100.0;
  }
  const StepControlConfig cfg;
  const StepDecision d = error_and_propose(c5, c4, 0.01, cfg);
  CHECK(d.e_u == 0.0);
  CHECK(d.accepted);
  CHECK(d.k_next == doctest::Approx(0.05).epsilon(1e-15));  // growth cap 5
}

TEST_CASE("acceptance is strict and the proposal follows the error ratio") {
  StepControlConfig cfg;
  cfg.tol = 1e-6;
  FieldSet c5(1, 2, false), c4(1, 2, false);

  SUBCASE("error below tolerance: accept, exponent 1/4") {
    c5.u(0)[0] = 1e-8;  // e_u = tol / 100
    const StepDecision d = error_and_propose(c5, c4, 0.2, cfg);
    CHECK(d.accepted);
    CHECK(d.e_u == doctest::Approx(1e-8).epsilon(1e-15));
    // 0.9 * (tol/e_u)^(1/4) = 0.9 * 100^0.25 = 0.9 * sqrt(10)
    CHECK(d.k_next / 0.2 ==
          doctest::Approx(2.8460498941515414).epsilon(1e-12));
  }

  SUBCASE("error above tolerance: reject, exponent 1/5") {
    c5.u(0)[0] = 1e-4;  // e_u = 100 * tol
    const StepDecision d = error_and_propose(c5, c4, 0.2, cfg);
    CHECK_FALSE(d.accepted);
    // 0.9 * (tol/e_u)^(1/5) = 0.9 * 0.01^0.2
    CHECK(d.k_next / 0.2 ==
          doctest::Approx(0.3582964534981474).epsilon(1e-12));
  }

  SUBCASE("error exactly at tolerance is a rejection") {
    c5.u(0)[0] = cfg.tol;
    const StepDecision d = error_and_propose(c5, c4, 0.2, cfg);
    CHECK_FALSE(d.accepted);
  }

  SUBCASE("the textbook controller swaps the exponents") {
    cfg.standard_controller = true;
    c5.u(0)[0] = 1e-8;
    const StepDecision accept = error_and_propose(c5, c4, 0.2, cfg);
    // 0.9 * 100^(1/5)
    CHECK(accept.k_next / 0.2 ==
          doctest::Approx(0.9 * std::pow(100.0, 0.2)).epsilon(1e-12));
    c5.u(0)[0] = 1e-4;
    const StepDecision reject = error_and_propose(c5, c4, 0.2, cfg);
    CHECK(reject.k_next / 0.2 ==
          doctest::Approx(0.9 * std::pow(0.01, 0.25)).epsilon(1e-12));
  }

  SUBCASE("proposal factor is clamped to [0.1, 5]") {
    c5.u(0)[0] = cfg.tol * 1e-12;
    CHECK(error_and_propose(c5, c4, 0.2, cfg).k_next ==
          doctest::Approx(1.0).epsilon(1e-14));
    c5.u(0)[0] = cfg.tol * 1e12;
    CHECK(error_and_propose(c5, c4, 0.2, cfg).k_next ==
          doctest::Approx(0.02).epsilon(1e-14));
  }
}

TEST_CASE("boundary stages match a direct six-stage evaluation") {
  const MarketModel model = fixtures::two_regime();
  const GridSpec grid{3.0, 60};
  const ExtrapolationWeights wt = ExtrapolationWeights::for_grid(grid, 4);
  // c = 0.3: every stage argument needs a real slope root in both regimes,
  // and flatter curvature leaves regime 1's discriminant negative.
  const SolverState st = synthetic_state(model, grid, {7.2, 8.1}, 0.3);
  const FieldSnapshot snap = make_snapshot(st, model, grid);
  const double k = 1e-4;

  auto slope_of = [&](const std::vector<double>& sf) {
    std::vector<double> g(2);
    for (std::size_t m = 0; m < 2; ++m) {
      const BoundaryCoupling cp = boundary_coupling(m, sf, snap, model, grid);
      const double q1 = q_prime0(m, sf[m], cp, model);
      const QuadraticCoeffs qc =
          quadratic_coeffs(m, sf[m], snap.u_nodes[m], q1, cp, wt, model);
      g[m] = boundary_slope(qc, m);
    }
    return g;
  };

  std::array<std::vector<double>, 6> slopes;
  for (std::size_t s = 0; s < 6; ++s) {
    std::vector<double> arg(st.sf);
    for (std::size_t j = 0; j < s; ++j)
      for (std::size_t m = 0; m < 2; ++m)
        arg[m] += k * entry(s, j) * slopes[j][m];
    slopes[s] = slope_of(arg);
  }
  std::vector<double> sf5(st.sf), sf4(st.sf);
  for (std::size_t s = 0; s < 6; ++s)
    for (std::size_t m = 0; m < 2; ++m) {
      sf5[m] += k * ButcherTableau::b5[s] * slopes[s][m];
      sf4[m] += k * ButcherTableau::b4[s] * slopes[s][m];
    }

  const BoundaryStages bst =
      boundary_stages(st.sf, snap, model, grid, wt, k);
  for (std::size_t m = 0; m < 2; ++m) {
    CHECK(bst.stage_sf[0][m] == st.sf[m]);
    CHECK(bst.stage_slope[0][m] ==
          doctest::Approx(slopes[0][m]).epsilon(1e-13));
    CHECK(bst.sf5[m] == doctest::Approx(sf5[m]).epsilon(1e-13));
    CHECK(bst.sf4[m] == doctest::Approx(sf4[m]).epsilon(1e-13));
  }
  // The embedded pair must actually disagree, else the boundary error
  // estimate would be degenerate.
  CHECK(bst.sf5 != bst.sf4);
}

TEST_CASE("short adaptive solve lands exactly on the horizon") {
  const MarketModel model = fixtures::two_regime();
  const GridSpec grid{3.0, 60};
  StepControlConfig cfg;

  SolveOptions opts;
  opts.horizon = 0.02;
  const SolveResult res = solve(model, grid, cfg, opts);

  CHECK(res.state.tau == 0.02);
  REQUIRE(!res.trajectory.empty());
  CHECK(res.trajectory.front().tau == 0.0);
  CHECK(res.trajectory.back().tau == 0.02);
  for (std::size_t i = 1; i < res.trajectory.size(); ++i)
    CHECK(res.trajectory[i].tau > res.trajectory[i - 1].tau);

  // First attempted step defaults to h^2.
  const double h = grid.h();
  REQUIRE(!res.steps.empty());
  CHECK(res.steps.front().k == h * h);
  for (const StepRecord& s : res.steps)
    if (s.accepted) CHECK(s.e_u < cfg.tol);

  // Boundaries start at the strike and move down, staying positive.
  for (std::size_t m = 0; m < 2; ++m) {
    CHECK(res.trajectory.front().sf[m] == model.strike);
    CHECK(res.state.sf[m] > 0.0);
    CHECK(res.state.sf[m] < model.strike);
    for (std::size_t i = 1; i < res.trajectory.size(); ++i)
      CHECK(res.trajectory[i].sf[m] <=
            res.trajectory[i - 1].sf[m] + 1e-12);
  }

  // Value field: nonnegative up to the scheme's far-tail dispersion (the
  // compact operator is not monotone, so the near-zero tail wiggles at the
  // 1e-8 scale this early), bounded by the strike, decaying to zero.
  for (std::size_t m = 0; m < 2; ++m) {
    for (double v : res.state.u[m]) {
      CHECK(v >= -1e-7);
      CHECK(v <= model.strike);
    }
    CHECK(std::abs(res.state.u[m].back()) < 1e-8);
    for (double v : res.state.w[m]) CHECK(v <= 1e-6);
  }
  CHECK_FALSE(res.state.with_gamma());
}

TEST_CASE("gamma fields ride along when requested") {
  const MarketModel model = fixtures::two_regime();
  const GridSpec grid{3.0, 60};
  StepControlConfig cfg;
  SolveOptions opts;
  opts.horizon = 0.01;
  opts.with_gamma = true;
  const SolveResult res = solve(model, grid, cfg, opts);
  REQUIRE(res.state.with_gamma());
  for (std::size_t m = 0; m < 2; ++m) {
    for (double v : (*res.state.y)[m]) CHECK(std::isfinite(v));
    CHECK(std::abs((*res.state.y)[m].back()) < 1e-8);
  }
}

TEST_CASE("fixed step mode commits every attempt at the given size") {
  const MarketModel model = fixtures::two_regime();
  const GridSpec grid{3.0, 60};
  StepControlConfig cfg;
  SolveOptions opts;
  // Small enough that the stage guard never fires from the initial state;
  // fixed mode raises instead of shrinking when a stage loses its root.
  opts.horizon = 5e-4;
  opts.fixed_dt = 2e-4;
  const SolveResult res = solve(model, grid, cfg, opts);

  CHECK(res.steps.size() == 3);  // 2e-4, 2e-4, clamped 1e-4
  for (const StepRecord& s : res.steps) CHECK(s.accepted);
  CHECK(res.steps[0].k == 2e-4);
  CHECK(res.steps[1].k == 2e-4);
  CHECK(res.steps[2].k == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(res.state.tau == 5e-4);
}

TEST_CASE("an explicit initial step is honored") {
  const MarketModel model = fixtures::two_regime();
  const GridSpec grid{3.0, 60};
  StepControlConfig cfg;
  cfg.initial_dt = 7e-4;
  SolveOptions opts;
  opts.horizon = 0.01;
  const SolveResult res = solve(model, grid, cfg, opts);
  REQUIRE(!res.steps.empty());
  CHECK(res.steps.front().k == 7e-4);
}

TEST_CASE("a zero horizon returns the payoff state untouched") {
  const MarketModel model = fixtures::two_regime();
  const GridSpec grid{3.0, 60};
  SolveOptions opts;
  opts.horizon = 0.0;
  const SolveResult res = solve(model, grid, StepControlConfig{}, opts);
  CHECK(res.state.tau == 0.0);
  CHECK(res.trajectory.size() == 1);
  CHECK(res.steps.empty());
  for (std::size_t m = 0; m < 2; ++m) {
    CHECK(res.state.sf[m] == model.strike);
    for (double v : res.state.u[m]) CHECK(v == 0.0);
  }
}

TEST_CASE("solver input validation") {
  const MarketModel model = fixtures::two_regime();
  const GridSpec grid{3.0, 60};
  StepControlConfig cfg;

  SUBCASE("horizon beyond maturity") {
    SolveOptions opts;
    opts.horizon = 1.5;
    CHECK_THROWS_AS(solve(model, grid, cfg, opts), std::invalid_argument);
  }
  SUBCASE("stencil does not fit the grid") {
    const GridSpec tiny{3.0, 12};  // interior 11 < 3 * xbar_cells
    CHECK_THROWS_AS(solve(model, tiny, cfg, false), GridTooSmall);
  }
  SUBCASE("nonpositive initial step") {
    cfg.initial_dt = 0.0;
    CHECK_THROWS_AS(solve(model, grid, cfg, false), std::invalid_argument);
  }
  SUBCASE("invalid model") {
    MarketModel bad = model;
    bad.generator.entries = {-6.0, 5.0, 9.0, -9.0};  // row does not sum to 0
    CHECK_THROWS_AS(solve(bad, grid, cfg, false), std::invalid_argument);
  }
}

TEST_CASE("an unreachable tolerance stalls out loudly") {
  const MarketModel model = fixtures::two_regime();
  const GridSpec grid{3.0, 60};
  StepControlConfig cfg;
  cfg.tol = 0.0;  // strict acceptance can never trigger
  SolveOptions opts;
  opts.horizon = 0.01;
  CHECK_THROWS_AS(solve(model, grid, cfg, opts), StepStalled);
}
