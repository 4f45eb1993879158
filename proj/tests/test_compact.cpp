#include <doctest.h>

#include <cmath>
#include <random>
#include <rsput/compact.hpp>
#include <rsput/errors.hpp>
#include <vector>

using namespace rsput;

namespace {

// Applies B and A directly from their stencil definitions, for residual
// checks that do not share code with the solver path.
std::vector<double> apply_b(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> out(n, 0.0);
  out[0] = 14.0 * x[0] - 5.0 * x[1] + 4.0 * x[2] - x[3];
  for (std::size_t i = 1; i + 1 < n; ++i)
    out[i] = x[i - 1] + 10.0 * x[i] + x[i + 1];
  out[n - 1] = 14.0 * x[n - 1] - 5.0 * x[n - 2] + 4.0 * x[n - 3] - x[n - 4];
  return out;
}

std::vector<double> apply_a(const std::vector<double>& v, double left,
                            double right, double h) {
  const std::size_t n = v.size();
  const double s = 12.0 / (h * h);
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double vm = i == 0 ? left : v[i - 1];
    const double vp = i + 1 == n ? right : v[i + 1];
    out[i] = s * (vm - 2.0 * v[i] + vp);
  }
  return out;
}

}  // namespace

TEST_CASE("grid floor is enforced") {
  CHECK_THROWS_AS(CompactOperator(7, 0.1), GridTooSmall);
  CHECK_NOTHROW(CompactOperator(8, 0.1));
}

TEST_CASE("quadratic samples differentiate exactly") {
  const std::size_t m = 16;
  const double h = 3.0 / m;
  const CompactOperator op(m, h);

  auto f = [](double x) { return 2.0 * x * x - 3.0 * x + 1.0; };
  std::vector<double> v(m - 1);
  for (std::size_t i = 1; i < m; ++i) v[i - 1] = f(i * h);
  const auto d2 = op.second_derivative(v, f(0.0), f(m * h));
  for (double d : d2) CHECK(d == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("polynomials through degree five are exact to roundoff") {
  const std::size_t m = 20;
  const double h = 2.0 / m;
  const CompactOperator op(m, h);

  auto f = [](double x) { return x * x * x * x * x - 2.0 * x * x * x + x; };
  auto f2 = [](double x) { return 20.0 * x * x * x - 12.0 * x; };
  std::vector<double> v(m - 1);
  for (std::size_t i = 1; i < m; ++i) v[i - 1] = f(i * h);
  const auto d2 = op.second_derivative(v, f(0.0), f(m * h));
  for (std::size_t i = 1; i < m; ++i)
    CHECK(d2[i - 1] == doctest::Approx(f2(i * h)).epsilon(1e-10));
}

TEST_CASE("fourth-order convergence on a smooth field") {
  auto max_err = [](std::size_t m) {
    const double h = 3.0 / m;
    const CompactOperator op(m, h);
    std::vector<double> v(m - 1);
    for (std::size_t i = 1; i < m; ++i) v[i - 1] = std::sin(i * h);
    const auto d2 = op.second_derivative(v, 0.0, std::sin(3.0));
    double err = 0.0;
    for (std::size_t i = 1; i < m; ++i)
      err = std::max(err, std::abs(d2[i - 1] + std::sin(i * h)));
    return err;
  };

  const double e1 = max_err(60);
  const double e2 = max_err(120);
  const double order = std::log2(e1 / e2);
  CHECK(order >= 3.7);
  CHECK(order <= 4.5);
}

TEST_CASE("solve residual against the defining stencils") {
  const std::size_t m = 32;
  const double h = 3.0 / m;
  const CompactOperator op(m, h);

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(m - 1);
  for (auto& x : v) x = dist(rng);
  const double left = dist(rng);
  const double right = dist(rng);

  const auto d2 = op.second_derivative(v, left, right);
  const auto lhs = apply_b(d2);
  const auto rhs = apply_a(v, left, right, h);

  double norm_v = 0.0;
  for (double x : v) norm_v = std::max(norm_v, std::abs(x));
  for (std::size_t i = 0; i < lhs.size(); ++i)
    CHECK(std::abs(lhs[i] - rhs[i]) <= 1e-10 * std::max(1.0, norm_v));
}

TEST_CASE("operator is linear") {
  const std::size_t m = 24;
  const double h = 1.0 / m;
  const CompactOperator op(m, h);

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> f(m - 1), g(m - 1), sum(m - 1);
  for (std::size_t i = 0; i < m - 1; ++i) {
    f[i] = dist(rng);
    g[i] = dist(rng);
    sum[i] = 2.0 * f[i] + 3.0 * g[i];
  }
  const double fl = dist(rng), fr = dist(rng), gl = dist(rng), gr = dist(rng);

  const auto df = op.second_derivative(f, fl, fr);
  const auto dg = op.second_derivative(g, gl, gr);
  const auto ds = op.second_derivative(sum, 2.0 * fl + 3.0 * gl, 2.0 * fr + 3.0 * gr);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double expect = 2.0 * df[i] + 3.0 * dg[i];
    CHECK(ds[i] == doctest::Approx(expect).epsilon(1e-12));
  }
}
