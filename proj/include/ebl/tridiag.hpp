#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "ebl/errors.hpp"

namespace ebl {

/// Solves a general tridiagonal system by Gaussian elimination with partial
/// pivoting (the dgtsv scheme). lower[i] couples row i+1 to column i, upper[i]
/// couples row i to column i+1. Throws NearSingularOperator on a zero pivot.
inline std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                            std::span<const double> upper, std::span<const double> rhs) {
  const std::size_t n = diag.size();
  require(n >= 1 && rhs.size() == n, "tridiagonal system size mismatch");
  require(lower.size() + 1 == n && upper.size() + 1 == n, "tridiagonal band size mismatch");
  std::vector<double> d(diag.begin(), diag.end()), du(upper.begin(), upper.end()), dl(lower.begin(), lower.end());
  std::vector<double> du2(n > 2 ? n - 2 : 0, 0.0), b(rhs.begin(), rhs.end());

  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      if (d[i] == 0.0) throw NearSingularOperator("singular tridiagonal matrix");
      const double f = dl[i] / d[i];
      d[i + 1] -= f * du[i];
      b[i + 1] -= f * b[i];
      dl[i] = 0.0;
    } else {
      // swap rows i and i+1
      const double f = d[i] / dl[i];
      d[i] = dl[i];
      const double tmp = d[i + 1];
      d[i + 1] = du[i] - f * tmp;
      du[i] = tmp;
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -f * du2[i];
      }
      std::swap(b[i], b[i + 1]);
      b[i + 1] -= f * b[i];
    }
  }
  if (d[n - 1] == 0.0) throw NearSingularOperator("singular tridiagonal matrix");

  std::vector<double> x(n);
  x[n - 1] = b[n - 1] / d[n - 1];
  if (n >= 2) x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
  for (std::size_t ii = n - 2; ii-- > 0;) x[ii] = (b[ii] - du[ii] * x[ii + 1] - du2[ii] * x[ii + 2]) / d[ii];
  for (double v : x) {
    if (!std::isfinite(v)) throw NearSingularOperator("tridiagonal solve produced non-finite values");
  }
  return x;
}

/// Symmetric tridiagonal shortcut.
inline std::vector<double> solve_symmetric_tridiagonal(std::span<const double> diag, std::span<const double> off,
                                                      std::span<const double> rhs) {
  return solve_tridiagonal(off, diag, off, rhs);
}

/// Number of eigenvalues below x of the pencil (T, diag(weight)), with T
/// symmetric tridiagonal: the count of negative pivots of T - x W.
inline int sturm_count(std::span<const double> diag, std::span<const double> off, std::span<const double> weight,
                       double x) {
  const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
  int count = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    double qi = diag[i] - x * weight[i];
    if (i > 0) qi -= off[i - 1] * off[i - 1] / q;
    if (qi == 0.0) qi = -tiny;
    if (qi < 0.0) ++count;
    q = qi;
  }
  return count;
}

}  // namespace ebl
