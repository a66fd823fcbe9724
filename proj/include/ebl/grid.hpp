#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ebl/errors.hpp"
#include "ebl/params.hpp"
#include "ebl/quadrature.hpp"

namespace ebl {

/// Closure imposed at the truncation radius r_max.
enum class Closure {
  robin,      // phi' = -beta phi with the decaying WKB rate
  dirichlet,  // phi(r_max) = 0
};

inline std::string to_string(Closure closure) { return closure == Closure::robin ? "robin" : "dirichlet"; }

inline Closure closure_from_string(const std::string& name) {
  if (name == "robin") return Closure::robin;
  if (name == "dirichlet") return Closure::dirichlet;
  throw InvalidArgument("unknown closure '" + name + "' (expected robin|dirichlet)");
}

struct GridPolicy {
  int M = 2000;
  double stretch = 2.0;
  double r_max_factor = 40.0;
  Closure closure = Closure::robin;
};

/// Graded radial mesh with r^{N-1}-weighted lumped-mass weights.
///
/// weights()[j] is the exact integral of the hat function at node j against
/// r^{N-1}, so sum_j w_j f(r_j) integrates piecewise-linear f exactly.
/// Whole-space meshes (r_0 = 0, N > 1) are cell-centred instead, see the constructor.
/// cell_measure()[j] is the exact integral of r^{N-1} over [r_j, r_{j+1}].
class RadialGrid {
 public:
  RadialGrid(std::vector<double> nodes, int N, Closure closure)
      : nodes_(std::move(nodes)), N_(N), closure_(closure) {
    require(N_ >= 1, "grid dimension must be positive");
    require(nodes_.size() >= 3, "grid needs at least three nodes");
    require(nodes_.front() >= 0.0, "grid radii must be nonnegative");
    for (std::size_t j = 0; j + 1 < nodes_.size(); ++j) {
      require(std::isfinite(nodes_[j + 1]) && nodes_[j + 1] > nodes_[j], "grid nodes must increase strictly");
    }
    // Exact for the degree-N polynomial hat * r^{N-1}.
    const GaussRule rule = gauss_legendre(N_ / 2 + 2);
    weights_.assign(nodes_.size(), 0.0);
    cell_measure_.assign(nodes_.size() - 1, 0.0);
    for (std::size_t j = 0; j + 1 < nodes_.size(); ++j) {
      const double a = nodes_[j], b = nodes_[j + 1], h = b - a;
      double left = 0.0, right = 0.0, whole = 0.0;
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double x = a + 0.5 * h * (rule.nodes[q] + 1.0);
        const double wq = 0.5 * h * rule.weights[q] * std::pow(x, N_ - 1);
        left += wq * (b - x) / h;
        right += wq * (x - a) / h;
        whole += wq;
      }
      weights_[j] += left;
      weights_[j + 1] += right;
      cell_measure_[j] = whole;
    }
    // Whole-space meshes use cell-centred fluxes instead: the conductance sees
    // r^{N-1} at the cell midpoint and the mass is the dual-cell volume. The
    // hat-mass version is off by O(1) at the first nodes near r = 0 (for
    // N = 2 the origin row reads (N+1)/h^2 instead of 2N/h^2), which leaves
    // phi'(0) = O(h). The cell-centred stencil is exact on quadratics there.
    if (nodes_.front() == 0.0 && N_ > 1) {
      const std::size_t n = nodes_.size();
      std::vector<double> mid(n + 1);
      mid[0] = 0.0;
      mid[n] = nodes_.back();
      for (std::size_t j = 0; j + 1 < n; ++j) {
        mid[j + 1] = 0.5 * (nodes_[j] + nodes_[j + 1]);
        cell_measure_[j] = (nodes_[j + 1] - nodes_[j]) * std::pow(mid[j + 1], N_ - 1);
      }
      for (std::size_t j = 0; j < n; ++j) weights_[j] = (std::pow(mid[j + 1], N_) - std::pow(mid[j], N_)) / N_;
    }

    // Quadrature weights: on each cell, f and r are cubic Lagrange interpolants
    // in the node index through the four nearest nodes and f r^{N-1} dr is
    // integrated by Gauss. Linear f are exact; smooth f are fourth order.
    const std::size_t n = nodes_.size();
    const std::size_t cnt = std::min<std::size_t>(4, n);
    quad_weights_.assign(n, 0.0);
    const GaussRule fine = gauss_legendre(2 * N_ + 3);
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const std::size_t s0 = std::min(j == 0 ? 0 : j - 1, n - cnt);
      for (std::size_t q = 0; q < fine.nodes.size(); ++q) {
        const double xi = static_cast<double>(j) + 0.5 * (fine.nodes[q] + 1.0);
        double L[4], dL[4];
        for (std::size_t i = 0; i < cnt; ++i) {
          L[i] = 1.0;
          dL[i] = 0.0;
          for (std::size_t k = 0; k < cnt; ++k) {
            if (k == i) continue;
            const double den = static_cast<double>(i) - static_cast<double>(k);
            double term = 1.0 / den;
            for (std::size_t m = 0; m < cnt; ++m)
              if (m != i && m != k) term *= (xi - static_cast<double>(s0 + m)) / (static_cast<double>(i) - static_cast<double>(m));
            dL[i] += term;
            L[i] *= (xi - static_cast<double>(s0 + k)) / den;
          }
        }
        double r = 0.0, dr = 0.0;
        for (std::size_t i = 0; i < cnt; ++i) {
          r += L[i] * nodes_[s0 + i];
          dr += dL[i] * nodes_[s0 + i];
        }
        const double wq = 0.5 * fine.weights[q] * std::pow(r, N_ - 1) * dr;
        for (std::size_t i = 0; i < cnt; ++i) quad_weights_[s0 + i] += wq * L[i];
      }
    }
  }

  int dimension() const { return N_; }
  Closure closure() const { return closure_; }
  std::size_t size() const { return nodes_.size(); }
  int M() const { return static_cast<int>(nodes_.size()) - 1; }
  double r_min() const { return nodes_.front(); }
  double r_max() const { return nodes_.back(); }
  double node(std::size_t j) const { return nodes_[j]; }
  double spacing(std::size_t j) const { return nodes_[j + 1] - nodes_[j]; }

  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> cell_measure() const { return cell_measure_; }

  /// Fourth-order weights for integrating smooth nodal data against r^{N-1}.
  /// The operators use the lumped weights() instead.
  std::span<const double> quadrature_weights() const { return quad_weights_; }

  /// sum_j q_j f_j with the quadrature weights.
  double integrate(std::span<const double> f) const {
    require(f.size() == nodes_.size(), "integrand size does not match grid");
    double acc = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) acc += quad_weights_[j] * f[j];
    return acc;
  }

  /// Same mesh with every radius multiplied by factor.
  RadialGrid scaled(double factor) const {
    require(std::isfinite(factor) && factor > 0.0, "scale factor must be positive");
    std::vector<double> scaled_nodes(nodes_);
    for (auto& r : scaled_nodes) r *= factor;
    return RadialGrid(std::move(scaled_nodes), N_, closure_);
  }

  /// Grid with the same index structure on [r_min, r_min + (r_max - r_min) * factor].
  RadialGrid stretched(double factor) const {
    require(std::isfinite(factor) && factor > 0.0, "stretch factor must be positive");
    std::vector<double> out(nodes_);
    for (auto& r : out) r = nodes_.front() + (r - nodes_.front()) * factor;
    return RadialGrid(std::move(out), N_, closure_);
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> quad_weights_;
  std::vector<double> cell_measure_;
  int N_;
  Closure closure_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

namespace detail {

inline std::vector<double> graded_nodes(double r0, double length, int M, double stretch) {
  std::vector<double> nodes(M + 1);
  for (int j = 0; j <= M; ++j) nodes[j] = r0 + length * std::pow(static_cast<double>(j) / M, stretch);
  nodes.front() = r0;
  nodes.back() = r0 + length;
  return nodes;
}

// r = L sinh(b t) / sinh(b) with b = 8 (stretch - 1), capped at 12. Odd in t, so errors that
// are smooth in the index stay even in r and do not tilt phi'(0). A power map r ~ t^s would
// (the discrete error picks up a term linear in r).
inline std::vector<double> odd_graded_nodes(double length, int M, double stretch) {
  const double b = std::min(8.0 * (stretch - 1.0), 12.0);
  std::vector<double> nodes(M + 1);
  for (int j = 0; j <= M; ++j) {
    const double t = static_cast<double>(j) / M;
    nodes[j] = b > 0.0 ? length * std::sinh(b * t) / std::sinh(b) : length * t;
  }
  nodes.front() = 0.0;
  nodes.back() = length;
  return nodes;
}

inline void check_policy(int M, double stretch, double r_max_factor) {
  require(M >= 16, "grid needs M >= 16 cells");
  require(std::isfinite(stretch) && stretch >= 1.0, "stretch must be finite and >= 1");
  require(std::isfinite(r_max_factor) && r_max_factor > 0.0, "r_max_factor must be finite and positive");
}

}  // namespace detail

/// Truncated exterior mesh on [1, 1 + r_max_factor * max(1, sqrt(lambda))] with
/// nodes r_j = 1 + (r_max - 1) (j/M)^stretch.
inline RadialGrid build_grid(const ProblemParams& params, int M, double stretch, double r_max_factor,
                             Closure closure = Closure::robin) {
  detail::check_policy(M, stretch, r_max_factor);
  require(std::isfinite(params.lambda) && params.lambda > 0.0, "lambda must be positive and finite");
  const double length = r_max_factor * std::max(1.0, std::sqrt(params.lambda));
  return RadialGrid(detail::graded_nodes(1.0, length, M, stretch), params.N, closure);
}

inline RadialGrid build_grid(const ProblemParams& params, const GridPolicy& policy) {
  return build_grid(params, policy.M, policy.stretch, policy.r_max_factor, policy.closure);
}

inline GridPtr make_grid(const ProblemParams& params, const GridPolicy& policy) {
  return std::make_shared<const RadialGrid>(build_grid(params, policy));
}

/// Mesh on [0, r_max] for whole-space radial problems (regular at the origin).
/// stretch = 1 is uniform; larger values refine the origin through a sinh map.
inline RadialGrid build_wholespace_grid(int N, int M, double stretch, double r_max,
                                        Closure closure = Closure::robin) {
  detail::check_policy(M, stretch, r_max);
  require(N >= 1, "dimension must be positive");
  return RadialGrid(detail::odd_graded_nodes(r_max, M, stretch), N, closure);
}

}  // namespace ebl
