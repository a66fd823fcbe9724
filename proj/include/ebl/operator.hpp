#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "ebl/errors.hpp"
#include "ebl/grid.hpp"
#include "ebl/tridiag.hpp"

namespace ebl {

/// Treatment of the first grid node.
enum class InnerBoundary {
  dirichlet,  // value prescribed at r_0 (exterior problems)
  regular,    // natural condition, phi'(0) = 0 for whole-space problems
};

/// Far-field Robin rate beta with phi' = -beta phi at r_max.
inline double robin_rate(double lambda, int N, double r_max) {
  return 1.0 / std::sqrt(lambda) + (N - 1) / (2.0 * r_max);
}

/// Lumped P1 discretization of -lambda r^{1-N} (r^{N-1} phi')' + c(r) phi.
///
/// The full matrix A acts on all nodes and is symmetric; the continuous
/// operator is W^{-1} A with W = diag(weights). Energy form:
///   phi^T A phi = sum_j k_j (phi_{j+1} - phi_j)^2 + sum_j w_j c_j phi_j^2 + closure
/// with k_j = lambda * cell_measure_j / h_j^2.
class DivergenceOperator {
 public:
  DivergenceOperator(GridPtr grid, double lambda, std::vector<double> potential,
                     InnerBoundary inner = InnerBoundary::dirichlet)
      : grid_(std::move(grid)), lambda_(lambda), potential_(std::move(potential)), inner_(inner) {
    require(grid_ != nullptr, "operator needs a grid");
    require(std::isfinite(lambda_) && lambda_ > 0.0, "diffusion must be positive and finite");
    require(potential_.size() == grid_->size(), "potential size does not match grid");
    for (double c : potential_) require(std::isfinite(c), "potential contains non-finite entries");
    const std::size_t n = grid_->size();
    const auto w = grid_->weights();
    const auto m = grid_->cell_measure();
    stiffness_.resize(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const double h = grid_->spacing(j);
      stiffness_[j] = lambda_ * m[j] / (h * h);
    }
    diag_.assign(n, 0.0);
    off_.assign(n - 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) diag_[j] = w[j] * potential_[j];
    for (std::size_t j = 0; j + 1 < n; ++j) {
      diag_[j] += stiffness_[j];
      diag_[j + 1] += stiffness_[j];
      off_[j] = -stiffness_[j];
    }
    if (grid_->closure() == Closure::robin) {
      const double rm = grid_->r_max();
      closure_term_ = lambda_ * std::pow(rm, grid_->dimension() - 1) * robin_rate(lambda_, grid_->dimension(), rm);
      diag_[n - 1] += closure_term_;
    }
  }

  const RadialGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  double lambda() const { return lambda_; }
  InnerBoundary inner() const { return inner_; }
  std::span<const double> potential() const { return potential_; }
  std::span<const double> stiffness() const { return stiffness_; }
  std::span<const double> diag() const { return diag_; }
  std::span<const double> off() const { return off_; }
  double closure_term() const { return closure_term_; }

  /// First and one-past-last unknown index of the reduced system.
  std::size_t first_free() const { return inner_ == InnerBoundary::dirichlet ? 1 : 0; }
  std::size_t last_free() const { return grid_->closure() == Closure::robin ? grid_->size() : grid_->size() - 1; }
  std::size_t free_size() const { return last_free() - first_free(); }

  /// A x on all nodes, evaluated in difference form.
  std::vector<double> apply_full(std::span<const double> x) const {
    require(x.size() == grid_->size(), "vector size does not match grid");
    const std::size_t n = x.size();
    const auto w = grid_->weights();
    std::vector<double> y(n);
    for (std::size_t j = 0; j < n; ++j) y[j] = w[j] * potential_[j] * x[j];
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const double flux = stiffness_[j] * (x[j] - x[j + 1]);
      y[j] += flux;
      y[j + 1] -= flux;
    }
    y[n - 1] += closure_term_ * x[n - 1];
    return y;
  }

  /// Continuous-operator action W^{-1} A x.
  std::vector<double> action(std::span<const double> x) const {
    std::vector<double> y = apply_full(x);
    const auto w = grid_->weights();
    for (std::size_t j = 0; j < y.size(); ++j) y[j] /= w[j];
    return y;
  }

  /// x^T A x in cellwise form (no cancellation between stiffness and diagonal).
  double energy(std::span<const double> x) const {
    require(x.size() == grid_->size(), "vector size does not match grid");
    const auto w = grid_->weights();
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < x.size(); ++j) {
      const double d = x[j + 1] - x[j];
      acc += stiffness_[j] * d * d;
    }
    for (std::size_t j = 0; j < x.size(); ++j) acc += w[j] * potential_[j] * x[j] * x[j];
    acc += closure_term_ * x.back() * x.back();
    return acc;
  }

  /// Bilinear form x^T A y.
  double bilinear(std::span<const double> x, std::span<const double> y) const {
    const std::vector<double> ay = apply_full(y);
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) acc += x[j] * ay[j];
    return acc;
  }

  /// Reduced-system bands (rows and columns of the free nodes).
  std::vector<double> free_diag(double shift = 0.0) const {
    const auto w = grid_->weights();
    std::vector<double> d(diag_.begin() + first_free(), diag_.begin() + last_free());
    if (shift != 0.0)
      for (std::size_t i = 0; i < d.size(); ++i) d[i] -= shift * w[first_free() + i];
    return d;
  }
  std::vector<double> free_off() const {
    return std::vector<double>(off_.begin() + first_free(), off_.begin() + (last_free() - 1));
  }
  std::vector<double> free_weights() const {
    const auto w = grid_->weights();
    return std::vector<double>(w.begin() + first_free(), w.begin() + last_free());
  }

  /// Solves A x = rhs on the free nodes with the prescribed value at r_0
  /// (ignored for a regular inner boundary); the value at r_max is 0 under the
  /// Dirichlet closure. rhs is indexed on all nodes, only free rows are used.
  std::vector<double> solve(std::span<const double> rhs, double boundary_value = 0.0, double shift = 0.0) const {
    require(rhs.size() == grid_->size(), "rhs size does not match grid");
    const std::size_t f0 = first_free(), f1 = last_free();
    std::vector<double> b(rhs.begin() + f0, rhs.begin() + f1);
    if (inner_ == InnerBoundary::dirichlet) b.front() -= off_[0] * boundary_value;
    const std::vector<double> d = free_diag(shift), e = free_off();
    const std::vector<double> xf = solve_symmetric_tridiagonal(d, e, b);
    std::vector<double> x(grid_->size(), 0.0);
    if (inner_ == InnerBoundary::dirichlet) x[0] = boundary_value;
    for (std::size_t i = 0; i < xf.size(); ++i) x[f0 + i] = xf[i];
    return x;
  }

 private:
  GridPtr grid_;
  double lambda_;
  std::vector<double> potential_;
  InnerBoundary inner_;
  std::vector<double> stiffness_;
  std::vector<double> diag_;
  std::vector<double> off_;
  double closure_term_ = 0.0;
};

inline DivergenceOperator assemble_divergence_form(GridPtr grid, double diffusion, std::vector<double> potential,
                                                   InnerBoundary inner = InnerBoundary::dirichlet) {
  return DivergenceOperator(std::move(grid), diffusion, std::move(potential), inner);
}

}  // namespace ebl
