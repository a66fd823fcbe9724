#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ebl/differences.hpp"
#include "ebl/errors.hpp"
#include "ebl/grid.hpp"
#include "ebl/operator.hpp"
#include "ebl/params.hpp"
#include "ebl/tridiag.hpp"

namespace ebl {

enum class ProfileKind { ground_state_exterior, ground_state_wholespace, kappa, eigenfunction, steklov_mode };

inline std::string to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::ground_state_exterior: return "ground_state_exterior";
    case ProfileKind::ground_state_wholespace: return "ground_state_wholespace";
    case ProfileKind::kappa: return "kappa";
    case ProfileKind::eigenfunction: return "eigenfunction";
    case ProfileKind::steklov_mode: return "steklov_mode";
  }
  return "unknown";
}

/// Scalar field on a radial grid plus solver metadata.
struct RadialProfile {
  GridPtr grid;
  std::vector<double> values;
  double boundary_slope = 0.0;  // derivative at the first node
  double residual_norm = 0.0;   // relative, weighted
  double tolerance = 0.0;
  ProfileKind kind = ProfileKind::ground_state_exterior;
  int iterations = 0;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t j) const { return values[j]; }
  std::vector<double> derivative() const { return nodal_derivative(grid->nodes(), values); }
};

/// Number of strict local maxima (discrete unimodality test).
inline int count_local_maxima(std::span<const double> v) {
  int count = 0;
  int last_sign = 0;
  for (std::size_t j = 0; j + 1 < v.size(); ++j) {
    const double d = v[j + 1] - v[j];
    const int s = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
    if (s == 0) continue;
    if (last_sign > 0 && s < 0) ++count;
    last_sign = s;
  }
  if (last_sign > 0) ++count;  // still rising at r_max
  return count;
}

/// Solver controls for the semilinear problems.
struct NewtonOptions {
  double tolerance = 1e-10;
  int max_iterations = 60;
  int max_halvings = 30;
  int amplitude_retries = 5;
  bool allow_continuation = true;
};

namespace detail {

inline double positive_power(double x, double e) { return x > 0.0 ? std::pow(x, e) : 0.0; }

/// Weighted norm sqrt(sum r_j^2 / w_j) over an index range.
inline double dual_norm(std::span<const double> r, std::span<const double> w, std::size_t f0, std::size_t f1) {
  double acc = 0.0;
  for (std::size_t j = f0; j < f1; ++j) acc += r[j] * r[j] / w[j];
  return std::sqrt(acc);
}

struct GroundStateResidual {
  std::vector<double> F;   // A u - W u_+^p on all nodes (free rows meaningful)
  double absolute = 0.0;
  double scale = 0.0;      // ||W u_+^p|| in the same norm
  double relative() const { return scale > 0.0 ? absolute / scale : absolute; }
};

inline GroundStateResidual ground_state_residual(const DivergenceOperator& op, double p, std::span<const double> u) {
  GroundStateResidual res;
  res.F = op.apply_full(u);
  const auto w = op.grid().weights();
  std::vector<double> nl(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    nl[j] = w[j] * positive_power(u[j], p);
    res.F[j] -= nl[j];
  }
  res.absolute = dual_norm(res.F, w, op.first_free(), op.last_free());
  res.scale = dual_norm(nl, w, op.first_free(), op.last_free());
  return res;
}

/// Damped Newton for A u = W u_+^p. Throws TrivialSolution / ConvergenceFailure.
inline RadialProfile newton_ground_state(const DivergenceOperator& op, double p, std::vector<double> u,
                                         const NewtonOptions& opt, ProfileKind kind) {
  const auto w = op.grid().weights();
  const std::size_t f0 = op.first_free(), f1 = op.last_free();
  const double initial_peak = *std::max_element(u.begin(), u.end());
  require(initial_peak > 0.0, "initial guess must be positive somewhere");
  GroundStateResidual res = ground_state_residual(op, p, u);
  int it = 0;
  bool converged = false, floor_reached = false, stalled = false;
  for (; it < opt.max_iterations; ++it) {
    if (!std::isfinite(res.absolute)) throw ConvergenceFailure("non-finite residual in Newton iteration");
    if (res.relative() < opt.tolerance) {
      converged = true;
      break;
    }
    std::vector<double> diag = op.free_diag();
    for (std::size_t i = 0; i < diag.size(); ++i) diag[i] -= w[f0 + i] * p * positive_power(u[f0 + i], p - 1.0);
    std::vector<double> rhs(res.F.begin() + f0, res.F.begin() + f1);
    std::vector<double> step;
    try {
      step = solve_symmetric_tridiagonal(diag, op.free_off(), rhs);
    } catch (const NearSingularOperator&) {
      throw ConvergenceFailure("singular Newton Jacobian");
    }
    double t = 1.0;
    bool accepted = false;
    std::vector<double> trial(u);
    for (int halving = 0; halving <= opt.max_halvings; ++halving) {
      for (std::size_t i = 0; i < step.size(); ++i) trial[f0 + i] = u[f0 + i] - t * step[i];
      GroundStateResidual tr = ground_state_residual(op, p, trial);
      if (std::isfinite(tr.absolute) && tr.absolute <= (1.0 - 1e-4 * t) * res.absolute) {
        stalled = tr.absolute > 0.5 * res.absolute && tr.relative() < 1e3 * opt.tolerance;
        u.swap(trial);
        res = std::move(tr);
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (accepted && stalled && !(res.relative() < opt.tolerance)) {
      // Newton stagnating at the rounding floor of a fine grid.
      converged = true;
      floor_reached = true;
      break;
    }
    if (!accepted) {
      // At the rounding floor a full step may not decrease the residual.
      if (res.relative() < 1e3 * opt.tolerance) {
        converged = true;
        floor_reached = true;
        break;
      }
      throw ConvergenceFailure("line search failed to reduce the residual");
    }
  }
  if (converged) {
    // One polishing step toward the rounding floor.
    std::vector<double> diag = op.free_diag();
    for (std::size_t i = 0; i < diag.size(); ++i) diag[i] -= w[f0 + i] * p * positive_power(u[f0 + i], p - 1.0);
    std::vector<double> rhs(res.F.begin() + f0, res.F.begin() + f1);
    try {
      const std::vector<double> step = solve_symmetric_tridiagonal(diag, op.free_off(), rhs);
      std::vector<double> trial(u);
      for (std::size_t i = 0; i < step.size(); ++i) trial[f0 + i] -= step[i];
      GroundStateResidual tr = ground_state_residual(op, p, trial);
      if (tr.absolute < res.absolute) {
        u.swap(trial);
        res = std::move(tr);
      }
    } catch (const NearSingularOperator&) {
    }
  }
  const double peak = *std::max_element(u.begin(), u.end());
  if (peak < 1e-6 * std::max(1.0, initial_peak) || res.scale == 0.0)
    throw TrivialSolution("Newton iteration collapsed onto the zero solution");
  if (!converged || !(res.relative() < opt.tolerance || floor_reached))
    throw ConvergenceFailure("Newton did not converge (relative residual " + sci(res.relative()) + ")");
  for (std::size_t j = f0; j < f1; ++j) {
    if (!(u[j] > 0.0)) throw ConvergenceFailure("Newton converged to a sign-changing solution");
  }

  RadialProfile out;
  out.grid = op.grid_ptr();
  out.values = std::move(u);
  out.boundary_slope = start_slope(out.grid->nodes(), out.values);
  out.residual_norm = res.relative();
  out.tolerance = opt.tolerance;
  out.kind = kind;
  out.iterations = it;
  return out;
}

/// Amplitude that makes the discrete Nehari identity exact for A * shape.
inline double nehari_amplitude(const DivergenceOperator& op, double p, std::span<const double> shape) {
  const auto w = op.grid().weights();
  double num = op.energy(shape), den = 0.0;
  for (std::size_t j = 0; j < shape.size(); ++j) den += w[j] * positive_power(shape[j], p + 1.0);
  require(num > 0.0 && den > 0.0, "degenerate initial shape");
  return std::pow(num / den, 1.0 / (p - 1.0));
}

inline DivergenceOperator ground_state_operator(const GridPtr& grid, double lambda, InnerBoundary inner) {
  return DivergenceOperator(grid, lambda, std::vector<double>(grid->size(), 1.0), inner);
}

/// Linear interpolation of (x, y) at z; 0 beyond the last node.
inline double interpolate(std::span<const double> x, std::span<const double> y, double z) {
  if (z <= x.front()) return y.front();
  if (z >= x.back()) return 0.0;
  const auto it = std::upper_bound(x.begin(), x.end(), z);
  const std::size_t j = static_cast<std::size_t>(it - x.begin()) - 1;
  const double t = (z - x[j]) / (x[j + 1] - x[j]);
  return (1.0 - t) * y[j] + t * y[j + 1];
}

inline std::vector<double> exterior_shape(const RadialGrid& grid, double lambda) {
  std::vector<double> g(grid.size());
  const double decay = 1.0 / std::sqrt(lambda);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double s = grid.node(j) - grid.r_min();
    g[j] = -std::expm1(-s) * std::exp(-s * decay);
  }
  g[0] = 0.0;
  return g;
}

/// Petviashvili iteration u <- M^{p/(p-1)} A^{-1} W u_+^p with the stabilizing
/// factor M = u^T A u / u^T W u_+^p. Pulls a rough guess into the basin of the
/// positive ground state before Newton takes over.
inline std::vector<double> petviashvili(const DivergenceOperator& op, double p, std::vector<double> u,
                                        double target, int max_iterations) {
  const auto w = op.grid().weights();
  const double gamma = p / (p - 1.0);
  for (int it = 0; it < max_iterations; ++it) {
    std::vector<double> nl(u.size());
    double num = op.energy(u), den = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      nl[j] = w[j] * positive_power(u[j], p);
      den += u[j] * nl[j];
    }
    if (!(den > 0.0) || !(num > 0.0)) break;
    const double scale = std::pow(num / den, gamma);
    std::vector<double> next = op.solve(nl, 0.0);
    for (double& v : next) v *= scale;
    u.swap(next);
    if (ground_state_residual(op, p, u).relative() < target) break;
  }
  return u;
}

inline RadialProfile solve_with_amplitude_retries(const DivergenceOperator& op, double p, std::vector<double> shape,
                                                  const NewtonOptions& opt, ProfileKind kind) {
  double amplitude = nehari_amplitude(op, p, shape);
  for (int attempt = 0;; ++attempt) {
    std::vector<double> guess(shape);
    for (double& g : guess) g *= amplitude;
    guess = petviashvili(op, p, std::move(guess), 1e-3, 400);
    try {
      return newton_ground_state(op, p, std::move(guess), opt, kind);
    } catch (const ConvergenceFailure&) {
      if (attempt >= opt.amplitude_retries) throw;
      amplitude *= 2.0;
    }
  }
}

}  // namespace detail

/// Positive solution of -lambda Delta u + u = u^p outside the unit ball,
/// u(1) = 0, far-field closure from the grid.
inline RadialProfile solve_exterior_ground_state(const ProblemParams& params, const GridPtr& grid,
                                                 const std::optional<std::vector<double>>& guess = std::nullopt,
                                                 const NewtonOptions& opt = {}) {
  params.validate();
  require(grid != nullptr && grid->dimension() == params.N, "grid dimension does not match params");
  const DivergenceOperator op = detail::ground_state_operator(grid, params.lambda, InnerBoundary::dirichlet);
  if (guess) {
    require(guess->size() == grid->size(), "initial guess size does not match grid");
    std::vector<double> g(*guess);
    g[0] = 0.0;
    try {
      return detail::newton_ground_state(op, params.p, std::move(g), opt, ProfileKind::ground_state_exterior);
    } catch (const ConvergenceFailure&) {
      if (!opt.allow_continuation) throw;
    }
  }
  try {
    return detail::solve_with_amplitude_retries(op, params.p, detail::exterior_shape(*grid, params.lambda), opt,
                                                ProfileKind::ground_state_exterior);
  } catch (const ConvergenceFailure&) {
    if (!opt.allow_continuation) throw;
  }

  // Continuation in lambda on the same grid, starting from lambda = 1.
  NewtonOptions inner = opt;
  inner.allow_continuation = false;
  const double target = params.lambda;
  double current = 1.0;
  RadialProfile prev = solve_exterior_ground_state(ProblemParams::from_lambda(params.N, params.p, current), grid,
                                                   std::nullopt, inner);
  double ratio = 1.5;
  while (current != target) {
    double next = target > current ? std::min(target, current * ratio) : std::max(target, current / ratio);
    const double scale = std::sqrt(current / next);
    std::vector<double> g(grid->size());
    for (std::size_t j = 0; j < g.size(); ++j)
      g[j] = detail::interpolate(grid->nodes(), prev.values, 1.0 + (grid->node(j) - 1.0) * scale);
    try {
      prev = detail::newton_ground_state(detail::ground_state_operator(grid, next, InnerBoundary::dirichlet),
                                         params.p, std::move(g), inner, ProfileKind::ground_state_exterior);
      current = next;
      ratio = std::min(1.5, ratio * 1.2);
    } catch (const ConvergenceFailure&) {
      ratio = 1.0 + 0.5 * (ratio - 1.0);
      if (ratio < 1.0 + 1e-4) throw ConvergenceFailure("lambda continuation stalled near " + std::to_string(current));
    }
  }
  return prev;
}

/// Ground state on the grid with diffusion lambda when the first node is a
/// Dirichlet hole of arbitrary radius (used for the scaling check).
inline RadialProfile solve_dirichlet_ground_state(int N, double p, double lambda, const GridPtr& grid,
                                                  const std::vector<double>& guess, const NewtonOptions& opt = {}) {
  require(grid != nullptr && grid->dimension() == N, "grid dimension mismatch");
  const DivergenceOperator op = detail::ground_state_operator(grid, lambda, InnerBoundary::dirichlet);
  std::vector<double> g(guess);
  g[0] = 0.0;
  return detail::newton_ground_state(op, p, std::move(g), opt, ProfileKind::ground_state_exterior);
}

/// Radial ground state U of -Delta U + U = U^p on R^N, grid on [0, r_max].
/// N = 1 gives the even soliton on the half line.
inline RadialProfile solve_wholespace_ground_state(int N, double p, const GridPtr& grid, const NewtonOptions& opt = {}) {
  require(N >= 1 && std::isfinite(p) && p > 1.0, "invalid whole-space parameters");
  if (N >= 3) require(p < ProblemParams::critical_exponent(N), "exponent must be subcritical");
  require(grid != nullptr && grid->dimension() == N && grid->r_min() == 0.0, "whole-space grid must start at 0");
  const DivergenceOperator op = detail::ground_state_operator(grid, 1.0, InnerBoundary::regular);
  std::vector<double> shape(grid->size());
  for (std::size_t j = 0; j < shape.size(); ++j) shape[j] = 1.0 / std::cosh(grid->node(j));
  return detail::solve_with_amplitude_retries(op, p, std::move(shape), opt, ProfileKind::ground_state_wholespace);
}

/// Linearized radial operator at u: potential 1 - p u_+^{p-1} (+ angular term).
inline std::vector<double> linearized_potential(const RadialProfile& u, double p, double lambda, double mu) {
  std::vector<double> c(u.size());
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double r = u.grid->node(j);
    c[j] = 1.0 - p * detail::positive_power(u.values[j], p - 1.0);
    if (mu != 0.0) c[j] += lambda * mu / (r * r);
  }
  return c;
}

/// Solves op x = 0 with x(r_0) = 1; residual relative to the boundary forcing.
inline RadialProfile solve_unit_boundary_extension(const DivergenceOperator& op, ProfileKind kind) {
  const double band = 1e-8;
  const auto d = op.free_diag();
  const auto e = op.free_off();
  const auto wf = op.free_weights();
  if (sturm_count(d, e, wf, band) != sturm_count(d, e, wf, -band))
    throw NearSingularOperator("operator has an eigenvalue within 1e-8 of zero");
  std::vector<double> zero(op.grid().size(), 0.0);
  RadialProfile out;
  out.grid = op.grid_ptr();
  out.values = op.solve(zero, 1.0);
  const auto w = op.grid().weights();
  const std::vector<double> r = op.apply_full(out.values);
  const double forcing = std::abs(op.off()[0]) / std::sqrt(w[1]);
  out.residual_norm = detail::dual_norm(r, w, op.first_free(), op.last_free()) / forcing;
  out.boundary_slope = start_slope(out.grid->nodes(), out.values);
  out.tolerance = 1e-10;
  out.kind = kind;
  return out;
}

/// kappa: -lambda Delta k + k - p u^{p-1} k = 0, k(1) = 1, decaying.
inline RadialProfile solve_kappa(const ProblemParams& params, const GridPtr& grid, const RadialProfile& u) {
  params.validate();
  require(u.grid == grid || (u.grid && u.grid->size() == grid->size()), "profile is not on the given grid");
  const DivergenceOperator op(grid, params.lambda, linearized_potential(u, params.p, params.lambda, 0.0));
  return solve_unit_boundary_extension(op, ProfileKind::kappa);
}

struct EnergyReport {
  double energy = 0.0;            // I_lambda(u)
  double physical_energy = 0.0;   // R^N I_lambda(u), energy on the complement of B_R
  double norm_squared = 0.0;      // ||u||_lambda^2
  double nonlinear = 0.0;         // int u^{p+1} r^{N-1}
  double nehari_gap = 0.0;
  double mp_identity_gap = 0.0;
};

inline EnergyReport energy_report(const ProblemParams& params, const GridPtr& grid, const RadialProfile& u) {
  params.validate();
  for (double v : u.values) require(std::isfinite(v), "profile contains non-finite values");
  const DivergenceOperator op = detail::ground_state_operator(grid, params.lambda, InnerBoundary::dirichlet);
  EnergyReport rep;
  rep.norm_squared = op.energy(u.values);
  const auto w = grid->weights();
  for (std::size_t j = 0; j < u.size(); ++j) rep.nonlinear += w[j] * std::pow(std::abs(u.values[j]), params.p + 1.0);
  rep.energy = 0.5 * rep.norm_squared - rep.nonlinear / (params.p + 1.0);
  rep.physical_energy = std::pow(params.R, params.N) * rep.energy;
  rep.nehari_gap = std::abs(rep.norm_squared - rep.nonlinear);
  rep.mp_identity_gap = std::abs((params.p + 1.0) * rep.energy - 0.5 * (params.p - 1.0) * rep.norm_squared);
  return rep;
}

/// u''(1) + (N-1) u'(1) from one-sided stencils.
inline double boundary_identity_defect(const RadialProfile& u) {
  const int N = u.grid->dimension();
  return start_curvature(u.grid->nodes(), u.values) + (N - 1) * start_slope(u.grid->nodes(), u.values);
}

}  // namespace ebl
