#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "ebl/differences.hpp"
#include "ebl/errors.hpp"
#include "ebl/group.hpp"
#include "ebl/quadrature.hpp"
#include "ebl/radial.hpp"
#include "ebl/spectrum.hpp"

namespace ebl {

struct SteklovResult {
  double lambda = 0.0;
  int k = 0;
  double mu = 0.0;
  double gamma = 0.0;        // reported value: gamma_form
  double gamma_slope = 0.0;  // -phi'(1), one-sided
  double gamma_form = 0.0;   // Q_{lambda,k}(phi) / lambda
  double sigma = 0.0;        // gamma - (N-1)
  double slope_vs_form_gap = 0.0;
  double boundary_spacing = 0.0;
  int morse_index = 0;       // negative Dirichlet eigenvalues of the mode
  RadialProfile phi;         // phi(1) = 1
};

/// Extension of unit boundary data for one mode: the mode operator applied to
/// phi vanishes on the free nodes and phi(1) = 1. Requires the Dirichlet mode
/// operator to be invertible (no eigenvalue within 1e-8 of zero).
inline RadialProfile solve_mode_extension(const ModeOperator& op) {
  try {
    return solve_unit_boundary_extension(op.op, ProfileKind::steklov_mode);
  } catch (const NearSingularOperator&) {
    throw NearSingularOperator("mode-" + std::to_string(op.k) +
                               " Dirichlet operator is within 1e-8 of singular at lambda = " +
                               std::to_string(op.params.lambda));
  }
}

/// Number of negative Dirichlet eigenvalues of the mode operator.
inline int dirichlet_morse_index(const ModeOperator& op) {
  return sturm_count(op.op.free_diag(), op.op.free_off(), op.op.free_weights(), 0.0);
}

inline RadialProfile solve_mode_extension(const ProblemParams& params, const GridPtr& grid, const RadialProfile& u,
                                          int k, const GroupSpec& group) {
  return solve_mode_extension(assemble_mode_operator(params, grid, u, k, group));
}

inline SteklovResult steklov_mode(const ModeOperator& op) {
  SteklovResult out;
  out.lambda = op.params.lambda;
  out.k = op.k;
  out.mu = op.mu;
  out.phi = solve_mode_extension(op);
  out.gamma_form = quadratic_form(op, out.phi, false) / op.params.lambda;
  out.gamma_slope = -out.phi.boundary_slope;
  out.gamma = out.gamma_form;
  out.sigma = out.gamma - (op.params.N - 1);
  out.slope_vs_form_gap = std::abs(out.gamma_slope - out.gamma_form);
  out.boundary_spacing = op.grid().spacing(0);
  out.morse_index = dirichlet_morse_index(op);
  return out;
}

inline SteklovResult steklov_mode(const ProblemParams& params, const GridPtr& grid, const RadialProfile& u, int k,
                                  const GroupSpec& group) {
  return steklov_mode(assemble_mode_operator(params, grid, u, k, group));
}

/// One point of the sigma curve.
struct SigmaSample {
  double lambda = 0.0;
  double sigma = 0.0;
  double gamma = 0.0;
  double tau0 = 0.0;  // mode-0 bottom eigenvalue
};

inline SigmaSample sigma_sample(int N, double p, double lambda, const GridPolicy& policy, const GroupSpec& group,
                                int k) {
  const GroundStateSample s = ground_state_at(N, p, lambda, policy);
  const SteklovResult st = steklov_mode(s.params, s.grid, s.u, k, group);
  const ModeOperator m0 = mode_operator_from_potential(s.params, s.grid, 0,
                                                       linearized_potential(s.u, p, lambda, 0.0));
  return SigmaSample{lambda, st.sigma, st.gamma, bottom_eigenvalue_bisection(m0.op)};
}

struct BifurcationResult {
  std::string group;
  int N = 2;
  double p = 3.0;
  int i1 = 0;
  int kernel_multiplicity = 0;
  double lambda0 = 0.0;
  double lambda_star = 0.0;
  double r_star = 0.0;
  double bracket_lo = 0.0;   // Lambda_1 role
  double bracket_hi = 0.0;   // Lambda_2 role
  double lambda0_tol = 0.0;
  double lambda_star_tol = 0.0;
  int bisection_steps = 0;
  double sigma_at_star = 0.0;
  std::vector<SigmaSample> sigma_curve;
  /// sigma_k(Lambda*) for the next admitted modes; all positive when the
  /// kernel is carried by mode i1 alone.
  std::vector<std::pair<int, double>> higher_sigma;
  bool kernel_isolated = true;
};

/// Bisection on lambda -> sigma_{i1}(lambda) across [lo, hi] to width tol.
/// lambda0 is the Dirichlet threshold; lo must clear it by safety_margin.
inline BifurcationResult locate_lambda_star(int N, double p, const GridPolicy& policy, const GroupSpec& group,
                                            double lo, double hi, double tol, double lambda0,
                                            double safety_margin = 0.0) {
  require(std::isfinite(lo) && std::isfinite(hi) && 0.0 < lo && lo < hi, "invalid lambda* bracket");
  require(std::isfinite(tol) && tol > 0.0, "bisection tolerance must be positive");
  if (!(lo > lambda0 + safety_margin))
    throw Lambda0Collision("lower bracket end " + std::to_string(lo) + " does not clear lambda0 = " +
                           std::to_string(lambda0));
  const int i1 = group.i1();
  BifurcationResult res;
  res.group = group.name();
  res.N = N;
  res.p = p;
  res.i1 = i1;
  res.kernel_multiplicity = group.m1();
  res.lambda0 = lambda0;
  res.bracket_lo = lo;
  res.bracket_hi = hi;
  res.lambda_star_tol = tol;
  auto eval = [&](double lam) {
    const SigmaSample s = sigma_sample(N, p, lam, policy, group, i1);
    res.sigma_curve.push_back(s);
    return s.sigma;
  };
  const double slo = eval(lo), shi = eval(hi);
  if (!(slo < 0.0 && shi > 0.0))
    throw NoBracket("sigma_" + std::to_string(i1) + " does not change sign on [" + std::to_string(lo) + ", " +
                    std::to_string(hi) + "]: " + std::to_string(slo) + ", " + std::to_string(shi));
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (eval(mid) < 0.0) lo = mid;
    else hi = mid;
    ++res.bisection_steps;
  }
  res.lambda_star = 0.5 * (lo + hi);
  res.r_star = 1.0 / std::sqrt(res.lambda_star);
  const GroundStateSample s = ground_state_at(N, p, res.lambda_star, policy);
  res.sigma_at_star = steklov_mode(s.params, s.grid, s.u, i1, group).sigma;
  const auto& modes = group.mode_indices();
  for (std::size_t i = 1; i < std::min<std::size_t>(modes.size(), 4); ++i) {
    const double sk = steklov_mode(s.params, s.grid, s.u, modes[i], group).sigma;
    res.higher_sigma.emplace_back(modes[i], sk);
    if (!(sk > 0.0)) res.kernel_isolated = false;
  }
  return res;
}

/// Bracket for Lambda* just above lambda0: sigma tends to -infinity as
/// lambda decreases to lambda0, so the lower end is lambda0 (1 + delta) with
/// small delta and the upper end is found by growing delta.
inline std::pair<double, double> scan_lambda_star_bracket(int N, double p, const GridPolicy& policy,
                                                          const GroupSpec& group, double lambda0,
                                                          double delta0 = 1e-6, double growth = 4.0,
                                                          double max_ratio = 100.0) {
  const int i1 = group.i1();
  auto sigma_at = [&](double lam) { return sigma_sample(N, p, lam, policy, group, i1).sigma; };
  double delta = delta0;
  double lo = lambda0 * (1.0 + delta);
  while (!(sigma_at(lo) < 0.0)) {
    delta /= 10.0;
    if (delta < 1e-11) throw NoBracket("sigma is not negative just above lambda0");
    lo = lambda0 * (1.0 + delta);
  }
  for (double d = delta * growth; 1.0 + d <= max_ratio; d *= growth) {
    const double hi = lambda0 * (1.0 + d);
    if (sigma_at(hi) > 0.0) return {lo, hi};
    lo = hi;
  }
  throw NoBracket("sigma stays negative up to the scan limit");
}

/// Geometric sampling of sigma_{i1} on (lambda0 (1 + delta), hi].
inline std::vector<SigmaSample> sample_sigma_curve(int N, double p, const GridPolicy& policy, const GroupSpec& group,
                                                   double lambda0, double hi, int count, double delta = 1e-4) {
  require(count >= 2, "sigma curve needs at least two samples");
  std::vector<SigmaSample> out;
  const double a = std::log(lambda0 * (1.0 + delta)), b = std::log(hi);
  for (int i = 0; i < count; ++i) {
    const double lam = std::exp(a + (b - a) * i / (count - 1));
    out.push_back(sigma_sample(N, p, lam, policy, group, group.i1()));
  }
  return out;
}

struct DomainShape {
  double R = 0.0;
  double epsilon = 0.0;
  int mode = 0;
  int N = 2;
  /// N = 2: (theta, radius, x, y). N >= 3: (polar angle, radius) along the
  /// zonal harmonic, with x = radius cos(angle), y = radius sin(angle).
  std::vector<double> angle, radius, x, y;
  double perturbation_mean = 0.0;  // integral of v over the sphere
};

/// First-order shape of the bifurcating domains: boundary R (1 + epsilon v).
inline DomainShape export_domain_shape(double r_star, const GroupSpec& group, double epsilon, int points = 0) {
  const int i1 = group.i1();
  require(std::isfinite(epsilon) && epsilon >= 0.0 && epsilon < 1.0 / (1.0 + i1 * i1),
          "epsilon must lie in [0, 1/(1 + i1^2))");
  require(std::isfinite(r_star) && r_star > 0.0, "base radius must be positive");
  DomainShape shape;
  shape.R = r_star;
  shape.epsilon = epsilon;
  shape.mode = i1;
  shape.N = group.N();
  if (points <= 0) points = 64 * i1;
  require(points >= 64 * i1, "shape needs at least 64 i1 boundary points");
  if (group.N() == 2) {
    double mean = 0.0;
    for (int j = 0; j < points; ++j) {
      const double th = 2.0 * std::numbers::pi * j / points;
      const double v = std::cos(i1 * th);
      const double rad = r_star * (1.0 + epsilon * v);
      shape.angle.push_back(th);
      shape.radius.push_back(rad);
      shape.x.push_back(rad * std::cos(th));
      shape.y.push_back(rad * std::sin(th));
      mean += v;
    }
    shape.perturbation_mean = epsilon * 2.0 * std::numbers::pi * mean / points;
    // close the polyline
    shape.angle.push_back(2.0 * std::numbers::pi);
    shape.radius.push_back(shape.radius.front());
    shape.x.push_back(shape.x.front());
    shape.y.push_back(shape.y.front());
    return shape;
  }
  const std::string& name = group.name();
  require(name.rfind("product-orthogonal(", 0) == 0,
          "zonal shape export in dimension >= 3 needs a product-orthogonal group");
  const int m = std::stoi(name.substr(19));
  const int N = group.N();
  // (N - m)|x'|^2 - m|x''|^2 on the sphere, with |x'| = cos(angle)
  const double amp = std::max(N - m, m);
  auto v_of = [&](double a) { return (N * std::cos(a) * std::cos(a) - m) / amp; };
  for (int j = 0; j <= points; ++j) {
    const double a = 0.5 * std::numbers::pi * j / points;
    const double rad = r_star * (1.0 + epsilon * v_of(a));
    shape.angle.push_back(a);
    shape.radius.push_back(rad);
    shape.x.push_back(rad * std::cos(a));
    shape.y.push_back(rad * std::sin(a));
  }
  // sphere measure cos^{m-1} sin^{N-m-1}
  const GaussRule rule = gauss_legendre(64);
  shape.perturbation_mean = epsilon * integrate(rule, 0.0, 0.5 * std::numbers::pi, [&](double a) {
                              return v_of(a) * std::pow(std::cos(a), m - 1) * std::pow(std::sin(a), N - m - 1);
                            });
  return shape;
}

inline DomainShape export_domain_shape(const BifurcationResult& result, const GroupSpec& group, double epsilon,
                                       int points = 0) {
  return export_domain_shape(result.r_star, group, epsilon, points);
}

struct BifurcateOptions {
  std::optional<std::pair<double, double>> lambda0_bracket;
  std::optional<std::pair<double, double>> lambda_star_bracket;
  double relative_tol = 1e-10;  // bisection widths relative to the bracket top
  int sigma_samples = 24;
  double sigma_span = 1.5;      // sigma curve sampled up to sigma_span * Lambda*
};

/// Lambda0 by bisection on tau_min, then Lambda* by bisection on sigma_{i1},
/// plus a sampled sigma curve over (Lambda0, sigma_span Lambda*].
inline BifurcationResult bifurcate(int N, double p, const GridPolicy& policy, const GroupSpec& group,
                                   const BifurcateOptions& opt = {}) {
  require(group.N() == N, "group dimension does not match N");
  require(opt.relative_tol > 0.0 && opt.relative_tol < 1e-2, "relative tolerance out of range");
  const auto b0 = opt.lambda0_bracket ? *opt.lambda0_bracket : scan_lambda0_bracket(N, p, policy, group);
  const Lambda0Result l0 = locate_lambda0(N, p, policy, group, b0.first, b0.second, opt.relative_tol * b0.second);
  const auto b1 = opt.lambda_star_bracket ? *opt.lambda_star_bracket
                                          : scan_lambda_star_bracket(N, p, policy, group, l0.lambda0);
  BifurcationResult res = locate_lambda_star(N, p, policy, group, b1.first, b1.second,
                                             opt.relative_tol * b1.second, l0.lambda0, l0.tol);
  res.lambda0_tol = l0.tol;
  if (opt.sigma_samples >= 2) {
    auto curve = sample_sigma_curve(N, p, policy, group, l0.lambda0, opt.sigma_span * res.lambda_star,
                                    opt.sigma_samples);
    res.sigma_curve.insert(res.sigma_curve.end(), curve.begin(), curve.end());
  }
  std::sort(res.sigma_curve.begin(), res.sigma_curve.end(),
            [](const SigmaSample& a, const SigmaSample& b) { return a.lambda < b.lambda; });
  return res;
}

}  // namespace ebl
