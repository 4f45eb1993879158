#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rsput {

/// Fourth-order compact second-derivative operator on a uniform grid.
///
/// Interior rows couple (1, 10, 1) second derivatives to the standard
/// three-point difference scaled by 12/h^2; the first and last rows use the
/// one-sided closures (14, -5, 4, -1) and its mirror so no ghost values are
/// needed. The implicit matrix B is constant for a given size, so it is
/// factored once (banded LU, bandwidth 3) at construction and reused for
/// every field, stage and regime on that grid.
class CompactOperator {
 public:
  /// m is the cell count (nodes 0..m); requires m >= 8 so the one-sided rows
  /// have distinct interior nodes to lean on. Throws GridTooSmall otherwise.
  CompactOperator(std::size_t m, double h);

  std::size_t cells() const { return m_; }
  std::size_t dim() const { return m_ - 1; }  ///< interior unknowns
  double spacing() const { return h_; }

  /// Second derivative at the interior nodes of samples `values` (interior
  /// nodes 1..m-1); the boundary samples enter through left_value = f(0) and
  /// right_value = f(x_max). `out` must have dim() entries and may not alias
  /// `values`.
  void second_derivative(std::span<const double> values, double left_value,
                         double right_value, std::span<double> out) const;

  std::vector<double> second_derivative(std::span<const double> values,
                                        double left_value,
                                        double right_value) const;

 private:
  double band(std::size_t i, std::size_t j) const;
  double& band(std::size_t i, std::size_t j);
  void factorize();

  std::size_t m_ = 0;
  double h_ = 0.0;
  double scale_ = 0.0;        ///< 12 / h^2
  std::vector<double> lu_;    ///< banded LU factors of B, bandwidth 3
};

}  // namespace rsput
