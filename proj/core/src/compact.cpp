#include "rsput/compact.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rsput/errors.hpp"

namespace rsput {

namespace {

// Bandwidth of B: the one-sided first/last rows reach three columns away
// from the diagonal, every other row one. LU without pivoting keeps fill
// inside the band.
constexpr std::size_t kBand = 3;
constexpr std::size_t kStride = 2 * kBand + 1;

}  // namespace

CompactOperator::CompactOperator(std::size_t m, double h) : m_(m), h_(h) {
  if (m < 8)
    throw GridTooSmall("compact operator needs at least 8 cells, got " +
                       std::to_string(m));
  if (!(h > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  scale_ = 12.0 / (h * h);

  const std::size_t n = dim();
  lu_.assign(n * kStride, 0.0);

  // Assemble B. Row 0: (14, -5, 4, -1); interior rows: (1, 10, 1); last row
  // mirrors row 0.
  band(0, 0) = 14.0;
  band(0, 1) = -5.0;
  band(0, 2) = 4.0;
  band(0, 3) = -1.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    band(i, i - 1) = 1.0;
    band(i, i) = 10.0;
    band(i, i + 1) = 1.0;
  }
  band(n - 1, n - 1) = 14.0;
  band(n - 1, n - 2) = -5.0;
  band(n - 1, n - 3) = 4.0;
  band(n - 1, n - 4) = -1.0;

  factorize();
}

double CompactOperator::band(std::size_t i, std::size_t j) const {
  assert(j + kBand >= i && j <= i + kBand);
  return lu_[i * kStride + (j + kBand - i)];
}

double& CompactOperator::band(std::size_t i, std::size_t j) {
  assert(j + kBand >= i && j <= i + kBand);
  return lu_[i * kStride + (j + kBand - i)];
}

void CompactOperator::factorize() {
  const std::size_t n = dim();
  for (std::size_t k = 0; k < n; ++k) {
    const double pivot = band(k, k);
    // B is strongly diagonally dominant after elimination; a tiny pivot can
    // only mean a logic error, not an input-dependent instability.
    if (std::abs(pivot) < 1e-8)
      throw std::runtime_error("compact operator factorization broke down");
    const std::size_t i_end = std::min(k + kBand, n - 1);
    const std::size_t j_end = std::min(k + kBand, n - 1);
    for (std::size_t i = k + 1; i <= i_end; ++i) {
      const double l = band(i, k) / pivot;
      band(i, k) = l;
      if (l == 0.0) continue;
      for (std::size_t j = k + 1; j <= j_end; ++j)
        band(i, j) -= l * band(k, j);
    }
    if (k + 1 >= n) break;
  }
}

void CompactOperator::second_derivative(std::span<const double> values,
                                        double left_value, double right_value,
                                        std::span<double> out) const {
  const std::size_t n = dim();
  assert(values.size() == n && out.size() == n);
  assert(values.data() != out.data());

  // Right-hand side: scaled three-point differences with the boundary samples
  // folded in at the ends.
  if (n == 1) {
    out[0] = scale_ * (left_value - 2.0 * values[0] + right_value);
  } else {
    out[0] = scale_ * (left_value - 2.0 * values[0] + values[1]);
    for (std::size_t i = 1; i + 1 < n; ++i)
      out[i] = scale_ * (values[i - 1] - 2.0 * values[i] + values[i + 1]);
    out[n - 1] = scale_ * (values[n - 2] - 2.0 * values[n - 1] + right_value);
  }

  // Forward substitution (unit lower factor).
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i_end = std::min(k + kBand, n - 1);
    for (std::size_t i = k + 1; i <= i_end; ++i) {
      const double l = band(i, k);
      if (l != 0.0) out[i] -= l * out[k];
    }
  }
  // Back substitution.
  for (std::size_t ri = n; ri-- > 0;) {
    double acc = out[ri];
    const std::size_t j_end = std::min(ri + kBand, n - 1);
    for (std::size_t j = ri + 1; j <= j_end; ++j) acc -= band(ri, j) * out[j];
    out[ri] = acc / band(ri, ri);
  }
}

std::vector<double> CompactOperator::second_derivative(
    std::span<const double> values, double left_value,
    double right_value) const {
  std::vector<double> out(dim());
  second_derivative(values, left_value, right_value, out);
  return out;
}

}  // namespace rsput
