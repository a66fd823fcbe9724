#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "ebl/errors.hpp"

namespace ebl {

/// Finite-difference weights for derivatives 0..order at z from the points x
/// (Fornberg's recursion). Returns weights[k][i] for the k-th derivative.
inline std::vector<std::vector<double>> fornberg_weights(double z, std::span<const double> x, int order) {
  const int n = static_cast<int>(x.size());
  require(n > order, "not enough points for the requested derivative");
  std::vector<std::vector<double>> c(order + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0, c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

/// order-th derivative at nodes[at] from the stencil nodes[first .. first+count).
inline double stencil_derivative(std::span<const double> nodes, std::span<const double> values, std::size_t at,
                                 std::size_t first, std::size_t count, int order) {
  require(first + count <= nodes.size() && values.size() == nodes.size(), "stencil outside the grid");
  const auto w = fornberg_weights(nodes[at], nodes.subspan(first, count), order);
  double acc = 0.0;
  for (std::size_t i = 0; i < count; ++i) acc += w[order][i] * values[first + i];
  return acc;
}

/// One-sided second-order first derivative at the first node.
inline double start_slope(std::span<const double> nodes, std::span<const double> values) {
  return stencil_derivative(nodes, values, 0, 0, 3, 1);
}

/// One-sided second derivative at the first node from four points.
inline double start_curvature(std::span<const double> nodes, std::span<const double> values) {
  return stencil_derivative(nodes, values, 0, 0, 4, 2);
}

/// First derivative at every node: centered three-point stencils inside,
/// one-sided three-point stencils at the ends.
inline std::vector<double> nodal_derivative(std::span<const double> nodes, std::span<const double> values) {
  const std::size_t n = nodes.size();
  require(n >= 3 && values.size() == n, "derivative needs at least three nodes");
  std::vector<double> d(n);
  d[0] = stencil_derivative(nodes, values, 0, 0, 3, 1);
  for (std::size_t j = 1; j + 1 < n; ++j) d[j] = stencil_derivative(nodes, values, j, j - 1, 3, 1);
  d[n - 1] = stencil_derivative(nodes, values, n - 1, n - 3, 3, 1);
  return d;
}

}  // namespace ebl
