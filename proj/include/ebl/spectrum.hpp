#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "ebl/errors.hpp"
#include "ebl/grid.hpp"
#include "ebl/group.hpp"
#include "ebl/operator.hpp"
#include "ebl/params.hpp"
#include "ebl/radial.hpp"
#include "ebl/tridiag.hpp"

namespace ebl {

/// Radial reduction of the linearized operator on degree-k harmonics:
/// -lambda r^{1-N}(r^{N-1} phi')' + (1 + lambda mu_k / r^2 - p u^{p-1}) phi.
struct ModeOperator {
  ProblemParams params;
  int k = 0;
  double mu = 0.0;
  DivergenceOperator op;

  const RadialGrid& grid() const { return op.grid(); }
  std::span<const double> potential() const { return op.potential(); }
};

inline ModeOperator assemble_mode_operator(const ProblemParams& params, const GridPtr& grid, const RadialProfile& u,
                                           int k, const GroupSpec& group) {
  params.validate();
  require(group.N() == params.N, "group dimension does not match params");
  require(k >= 0 && group.admits(k), "mode " + std::to_string(k) + " is not admitted by group " + group.name());
  require(u.grid != nullptr && u.size() == grid->size(), "profile is not on the given grid");
  const double mu = angular_eigenvalue(k, params.N);
  return ModeOperator{params, k, mu,
                      DivergenceOperator(grid, params.lambda, linearized_potential(u, params.p, params.lambda, mu))};
}

/// Mode operator with an arbitrary potential (used for the free operator).
inline ModeOperator mode_operator_from_potential(const ProblemParams& params, const GridPtr& grid, int k,
                                                 std::vector<double> potential) {
  return ModeOperator{params, k, angular_eigenvalue(k, params.N),
                      DivergenceOperator(grid, params.lambda, std::move(potential))};
}

struct EigenPair {
  double tau = 0.0;
  RadialProfile phi;   // weighted norm 1, zero on Dirichlet nodes
  int index = 0;
  double residual = 0.0;  // ||A phi - tau W phi||_{W^-1}
};

namespace detail {

inline double weighted_dot(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * x[i] * y[i];
  return acc;
}

/// Eigenvalues of the pencil lie in the union of the generalized Gershgorin discs.
inline std::pair<double, double> gershgorin(std::span<const double> d, std::span<const double> e,
                                            std::span<const double> w) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < d.size(); ++i) {
    double rad = 0.0;
    if (i > 0) rad += std::abs(e[i - 1]);
    if (i + 1 < d.size()) rad += std::abs(e[i]);
    lo = std::min(lo, (d[i] - rad) / w[i]);
    hi = std::max(hi, (d[i] + rad) / w[i]);
  }
  const double pad = 1e-12 * std::max(std::abs(lo), std::abs(hi)) + 1e-300;
  return {lo - pad, hi + pad};
}

}  // namespace detail

/// The count smallest eigenpairs of A phi = tau W phi on the free nodes:
/// Sturm bisection for the bracket, shifted inverse iteration for the vector,
/// and the Rayleigh quotient in cellwise form for the final tau.
inline std::vector<EigenPair> bottom_eigenpairs(const DivergenceOperator& op, int count) {
  require(count >= 1, "eigenpair count must be positive");
  const std::vector<double> d = op.free_diag(), e = op.free_off(), w = op.free_weights();
  const std::size_t n = d.size(), f0 = op.first_free();
  require(static_cast<std::size_t>(count) <= n, "more eigenpairs requested than unknowns");
  const auto [glo, ghi] = detail::gershgorin(d, e, w);
  if (!(std::isfinite(glo) && std::isfinite(ghi)) || sturm_count(d, e, w, glo) != 0 ||
      sturm_count(d, e, w, ghi) != static_cast<int>(n))
    throw BisectionBracketFailure("Sturm counts inconsistent with the Gershgorin bounds");

  std::vector<EigenPair> out;
  std::vector<std::vector<double>> previous;
  for (int idx = 0; idx < count; ++idx) {
    double lo = glo, hi = ghi;
    for (int it = 0; it < 2000; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (sturm_count(d, e, w, mid) > idx) hi = mid;
      else lo = mid;
      if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi))) break;
    }
    if (!(sturm_count(d, e, w, lo) <= idx && sturm_count(d, e, w, hi) > idx))
      throw BisectionBracketFailure("bisection lost the eigenvalue bracket");

    double shift = 0.5 * (lo + hi);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.5 * std::sin(0.37 * static_cast<double>(i) + idx);
    auto normalize = [&](std::vector<double>& v) {
      for (const auto& q : previous) {
        const double c = detail::weighted_dot(v, q, w);
        for (std::size_t i = 0; i < n; ++i) v[i] -= c * q[i];
      }
      const double nrm = std::sqrt(detail::weighted_dot(v, v, w));
      for (double& vi : v) vi /= nrm;
    };
    normalize(x);
    for (int it = 0; it < 6; ++it) {
      std::vector<double> rhs(n);
      for (std::size_t i = 0; i < n; ++i) rhs[i] = w[i] * x[i];
      std::vector<double> ds(d);
      for (std::size_t i = 0; i < n; ++i) ds[i] -= shift * w[i];
      try {
        x = solve_symmetric_tridiagonal(ds, e, rhs);
      } catch (const NearSingularOperator&) {
        shift = std::nextafter(shift, hi);
        continue;
      }
      normalize(x);
    }

    std::vector<double> full(op.grid().size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) full[f0 + i] = x[i];
    // sign: first significant entry positive
    const double big = *std::max_element(x.begin(), x.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    for (double v : x) {
      if (std::abs(v) > 1e-3 * std::abs(big)) {
        if (v < 0.0)
          for (double& f : full) f = -f;
        break;
      }
    }
    EigenPair pair;
    pair.index = idx;
    pair.tau = op.energy(full);
    const std::vector<double> ax = op.apply_full(full);
    const auto wf = op.grid().weights();
    double res = 0.0;
    for (std::size_t i = f0; i < op.last_free(); ++i) {
      const double ri = ax[i] - pair.tau * wf[i] * full[i];
      res += ri * ri / wf[i];
    }
    pair.residual = std::sqrt(res);
    pair.phi.grid = op.grid_ptr();
    pair.phi.values = std::move(full);
    pair.phi.boundary_slope = start_slope(pair.phi.grid->nodes(), pair.phi.values);
    pair.phi.residual_norm = pair.residual;
    pair.phi.tolerance = 1e-9;
    pair.phi.kind = ProfileKind::eigenfunction;
    previous.push_back(x);
    out.push_back(std::move(pair));
  }
  return out;
}

inline std::vector<EigenPair> bottom_eigenpairs(const ModeOperator& op, int count) {
  return bottom_eigenpairs(op.op, count);
}

/// Bottom eigenvalue only (no eigenvector), by Sturm bisection.
inline double bottom_eigenvalue_bisection(const DivergenceOperator& op) {
  const std::vector<double> d = op.free_diag(), e = op.free_off(), w = op.free_weights();
  auto [lo, hi] = detail::gershgorin(d, e, w);
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (sturm_count(d, e, w, mid) > 0) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

/// Q_{lambda,k}(phi) on all nodes; with boundary_term the value
/// lambda (N-1) phi(1)^2 is subtracted.
inline double quadratic_form(const ModeOperator& op, std::span<const double> phi, bool boundary_term) {
  require(phi.size() == op.grid().size(), "profile is not on the operator grid");
  for (double v : phi) require(std::isfinite(v), "profile contains non-finite values");
  double q = op.op.energy(phi);
  if (boundary_term) q -= op.params.lambda * (op.params.N - 1) * phi[0] * phi[0];
  return q;
}

inline double quadratic_form(const ModeOperator& op, const RadialProfile& phi, bool boundary_term) {
  return quadratic_form(op, std::span<const double>(phi.values), boundary_term);
}

/// Discrete weighted norm (int (a phi'^2 + phi^2) r^{N-1} dr)^{1/2}; a = 1 is H^1.
inline double weighted_h1_norm(const RadialGrid& grid, std::span<const double> phi, double a = 1.0) {
  const auto m = grid.cell_measure();
  const auto w = grid.weights();
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < phi.size(); ++j) {
    const double h = grid.spacing(j), dphi = phi[j + 1] - phi[j];
    acc += a * m[j] * dphi * dphi / (h * h);
  }
  for (std::size_t j = 0; j < phi.size(); ++j) acc += w[j] * phi[j] * phi[j];
  return std::sqrt(acc);
}

/// Exterior ground state together with its grid at one lambda.
struct GroundStateSample {
  ProblemParams params;
  GridPtr grid;
  RadialProfile u;
};

inline GroundStateSample ground_state_at(int N, double p, double lambda, const GridPolicy& policy) {
  GroundStateSample s;
  s.params = ProblemParams::from_lambda(N, p, lambda);
  s.grid = make_grid(s.params, policy);
  s.u = solve_exterior_ground_state(s.params, s.grid);
  return s;
}

/// Mode-0 Dirichlet pair (tau_0, z_lambda) with z positive.
struct RadialLinearization {
  double tau0 = 0.0;
  double tau1 = 0.0;
  RadialProfile z;  // weighted discrete H^1 norm 1
};

inline RadialLinearization radial_linearization(const GroundStateSample& s) {
  const ModeOperator op = mode_operator_from_potential(s.params, s.grid, 0,
                                                       linearized_potential(s.u, s.params.p, s.params.lambda, 0.0));
  auto pairs = bottom_eigenpairs(op, 2);
  RadialLinearization out;
  out.tau0 = pairs[0].tau;
  out.tau1 = pairs[1].tau;
  out.z = std::move(pairs[0].phi);
  const double nrm = weighted_h1_norm(*s.grid, out.z.values);
  for (double& v : out.z.values) v /= nrm;
  out.z.boundary_slope /= nrm;
  return out;
}

/// Bottom Dirichlet eigenvalue of mode k at lambda.
inline double tau_min(const GroundStateSample& s, int k, const GroupSpec& group) {
  const ModeOperator op = assemble_mode_operator(s.params, s.grid, s.u, k, group);
  return bottom_eigenpairs(op, 1).front().tau;
}

struct Lambda0Result {
  double lambda0 = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double tol = 0.0;
  int bisection_steps = 0;
  std::vector<std::pair<double, double>> samples;  // (lambda, tau_min)
  /// Bottom eigenvalues of the next admitted modes at lambda0 (non-binding check).
  std::vector<std::pair<int, double>> higher_modes;
  bool higher_modes_nonbinding = true;
};

/// Bisection on lambda -> tau_min(lambda, i1) across [lo, hi] to width tol.
inline Lambda0Result locate_lambda0(int N, double p, const GridPolicy& policy, const GroupSpec& group, double lo,
                                    double hi, double tol) {
  require(std::isfinite(lo) && std::isfinite(hi) && 0.0 < lo && lo < hi, "invalid lambda0 bracket");
  require(std::isfinite(tol) && tol > 0.0, "bisection tolerance must be positive");
  const int i1 = group.i1();
  Lambda0Result res;
  res.bracket_lo = lo;
  res.bracket_hi = hi;
  res.tol = tol;
  auto eval = [&](double lam) {
    const double t = tau_min(ground_state_at(N, p, lam, policy), i1, group);
    res.samples.emplace_back(lam, t);
    return t;
  };
  const double tlo = eval(lo), thi = eval(hi);
  if (!(tlo <= 0.0 && thi > 0.0))
    throw NoBracket("mode-" + std::to_string(i1) + " bottom eigenvalue does not change sign on [" +
                    std::to_string(lo) + ", " + std::to_string(hi) + "]");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (eval(mid) <= 0.0) lo = mid;
    else hi = mid;
    ++res.bisection_steps;
  }
  res.lambda0 = 0.5 * (lo + hi);
  const GroundStateSample s = ground_state_at(N, p, res.lambda0, policy);
  const double t1 = tau_min(s, i1, group);
  const auto& modes = group.mode_indices();
  for (std::size_t i = 1; i < std::min<std::size_t>(modes.size(), 4); ++i) {
    const double tk = tau_min(s, modes[i], group);
    res.higher_modes.emplace_back(modes[i], tk);
    if (!(tk > t1)) res.higher_modes_nonbinding = false;
  }
  std::sort(res.samples.begin(), res.samples.end());
  return res;
}

/// Geometric scan from (p-1)/mu_{i1} upward until tau_min(i1) turns positive.
inline std::pair<double, double> scan_lambda0_bracket(int N, double p, const GridPolicy& policy,
                                                      const GroupSpec& group, double factor = 1.25,
                                                      double lambda_cap = 1e6) {
  double lo = (p - 1.0) / group.mu(group.i1());
  if (tau_min(ground_state_at(N, p, lo, policy), group.i1(), group) > 0.0)
    throw NoBracket("mode bottom eigenvalue already positive at the lower bound");
  for (double hi = lo * factor; hi <= lambda_cap; hi *= factor) {
    if (tau_min(ground_state_at(N, p, hi, policy), group.i1(), group) > 0.0) return {lo, hi};
    lo = hi;
  }
  throw NoBracket("no sign change of the mode bottom eigenvalue below the lambda cap");
}

}  // namespace ebl
