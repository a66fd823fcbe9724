#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ebl/errors.hpp"
#include "ebl/group.hpp"
#include "ebl/quadrature.hpp"
#include "ebl/radial.hpp"
#include "ebl/spectrum.hpp"
#include "ebl/steklov.hpp"

namespace ebl {

/// One evaluated inequality or identity: both sides, margin = rhs - lhs.
struct CheckReport {
  std::string name;
  std::string inputs;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> details;

  void finish() { pass = std::isfinite(margin) && margin >= -tolerance; }
};

/// Piecewise-linear function on increasing knots, zero outside [front, back].
struct PiecewiseLinear {
  std::vector<double> knots;
  std::vector<double> values;

  double operator()(double s) const {
    if (s < knots.front() || s > knots.back()) return 0.0;
    const auto it = std::upper_bound(knots.begin(), knots.end(), s);
    if (it == knots.end()) return values.back();
    const std::size_t i = static_cast<std::size_t>(it - knots.begin()) - 1;
    const double t = (s - knots[i]) / (knots[i + 1] - knots[i]);
    return (1.0 - t) * values[i] + t * values[i + 1];
  }
  void validate() const {
    require(knots.size() >= 2 && knots.size() == values.size(), "piecewise-linear function needs matching knots");
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) require(knots[i + 1] > knots[i], "knots must increase");
    for (double v : values) require(std::isfinite(v), "piecewise-linear values must be finite");
  }
};

namespace detail {

/// Stateless seed mixing so every instance of a family has its own stream.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Uniform [0, 1) from the top 53 bits: identical on every standard library.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// int_a^b f'^2 s^{N-1} + c int_a^b f^2 s^{N-3} over the pieces of f.
inline std::pair<double, double> piecewise_integrals(const PiecewiseLinear& f, int N, double from, int gauss_points) {
  const GaussRule rule = gauss_legendre(gauss_points);
  double grad = 0.0, mass = 0.0;
  for (std::size_t i = 0; i + 1 < f.knots.size(); ++i) {
    const double a = std::max(f.knots[i], from), b = f.knots[i + 1];
    if (b <= a) continue;
    const double slope = (f.values[i + 1] - f.values[i]) / (f.knots[i + 1] - f.knots[i]);
    grad += slope * slope * (std::pow(b, N) - std::pow(a, N)) / N;
    mass += integrate(rule, a, b, [&](double s) {
      const double v = f(s);
      return v * v * std::pow(s, N - 3);
    });
  }
  return {grad, mass};
}

}  // namespace detail

/// Random f on [r, r + L], f(r) != 0, f(r + L) = 0, 2..8 interior knots.
inline PiecewiseLinear random_piecewise_linear(double r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int pieces = 2 + static_cast<int>(detail::unit_uniform(rng) * 7.0);
  const double length = r * (0.25 + 4.75 * detail::unit_uniform(rng));
  std::vector<double> cuts(pieces - 1);
  for (double& c : cuts) c = detail::unit_uniform(rng);
  std::sort(cuts.begin(), cuts.end());
  PiecewiseLinear f;
  f.knots.push_back(r);
  for (double c : cuts) {
    const double s = r + length * c;
    if (s > f.knots.back() + 1e-6 * length && s < r + length * (1.0 - 1e-6)) f.knots.push_back(s);
  }
  f.knots.push_back(r + length);
  for (std::size_t i = 0; i + 1 < f.knots.size(); ++i) f.values.push_back(2.0 * detail::unit_uniform(rng) - 1.0);
  if (std::abs(f.values.front()) < 1e-3) f.values.front() = 0.5;
  f.values.push_back(0.0);
  return f;
}

/// r^{N-2} f(r)^2 <= (1/lambda) int_r^inf f'^2 s^{N-1} + (2 - N + lambda) int_r^inf f^2 s^{N-3}.
inline CheckReport hardy_check(int N, double lambda, double r, const PiecewiseLinear& f, std::uint64_t seed = 0,
                               int gauss_points = 8) {
  require(N >= 2, "dimension must be at least 2");
  require(std::isfinite(lambda) && lambda > 0.0, "lambda must be positive");
  require(std::isfinite(r) && r > 0.0, "r must be positive");
  f.validate();
  require(f.knots.front() >= r, "f must be supported in [r, infinity)");
  require(f.values.back() == 0.0, "f must vanish at the end of its support");
  const auto [grad, mass] = detail::piecewise_integrals(f, N, r, gauss_points);
  CheckReport rep;
  rep.name = "hardy";
  std::ostringstream in;
  in << "N=" << N << " lambda=" << lambda << " r=" << r << " knots=" << f.knots.size();
  rep.inputs = in.str();
  const double fr = f(r);
  rep.lhs = std::pow(r, N - 2) * fr * fr;
  rep.rhs = grad / lambda + (2.0 - N + lambda) * mass;
  rep.margin = rep.rhs - rep.lhs;
  rep.tolerance = 1e-10;
  rep.seed = seed;
  rep.finish();
  return rep;
}

/// R^{N-2} phi(R)^2 <= (1/N) int_R^inf (phi'^2 r^{N-1} + mu_k phi^2 r^{N-3}), mu_k >= 2N.
inline CheckReport trace_check(int N, double R, const PiecewiseLinear& phi, int k, const GroupSpec& group,
                               std::uint64_t seed = 0, int gauss_points = 8) {
  require(N == group.N(), "group dimension does not match N");
  if (k == 0) throw InvalidArgument("trace inequality excludes the mean mode k = 0");
  require(group.admits(k), "mode " + std::to_string(k) + " is not admitted by group " + group.name());
  const double mu = group.mu(k);
  require(mu >= 2.0 * N, "trace inequality needs mu_k >= 2N");
  require(std::isfinite(R) && R > 0.0, "R must be positive");
  phi.validate();
  require(phi.knots.front() >= R, "profile must live on [R, infinity)");
  const auto [grad, mass] = detail::piecewise_integrals(phi, N, R, gauss_points);
  CheckReport rep;
  rep.name = "trace";
  std::ostringstream in;
  in << "N=" << N << " R=" << R << " k=" << k << " mu=" << mu << " group=" << group.name();
  rep.inputs = in.str();
  const double v = phi(R);
  rep.lhs = std::pow(R, N - 2) * v * v;
  rep.rhs = (grad + mu * mass) / N;
  rep.margin = rep.rhs - rep.lhs;
  rep.tolerance = 1e-10;
  rep.seed = seed;
  rep.finish();
  return rep;
}

/// P1 interpolant of a grid profile as a piecewise-linear function.
inline PiecewiseLinear as_piecewise_linear(const RadialProfile& phi) {
  PiecewiseLinear f;
  f.knots.assign(phi.grid->nodes().begin(), phi.grid->nodes().end());
  f.values = phi.values;
  return f;
}

/// psi = u_lambda(r) phi(theta) with mode i1: Q(psi) < 0 and
/// Q(psi) <= int (1 - p + lambda mu_{i1}) u^2 r^{N-1}.
inline CheckReport gdeg_witness(const ProblemParams& params, const GridPtr& grid, const RadialProfile& u,
                                const GroupSpec& group) {
  params.validate();
  const int i1 = group.i1();
  const double mu = group.mu(i1);
  const double threshold = (params.p - 1.0) / mu;
  require(params.lambda < threshold * (1.0 - 0.05),
          "witness needs lambda below 0.95 (p-1)/mu_i1 = " + std::to_string(0.95 * threshold));
  const ModeOperator op = assemble_mode_operator(params, grid, u, i1, group);
  const double Q = quadratic_form(op, u, false);
  const auto w = grid->weights();
  double bound = 0.0, mass = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) mass += w[j] * u.values[j] * u.values[j];
  bound = (1.0 - params.p + params.lambda * mu) * mass;
  CheckReport rep;
  rep.name = "gdeg_witness";
  std::ostringstream in;
  in << "N=" << params.N << " p=" << params.p << " lambda=" << params.lambda << " group=" << group.name();
  rep.inputs = in.str();
  rep.lhs = Q;
  rep.rhs = bound;
  rep.tolerance = 1e-8;
  rep.margin = Q < 0.0 ? bound - Q : -std::abs(Q) - 1.0;
  rep.details = {{"Q", Q}, {"bound", bound}, {"threshold", threshold}, {"mu", mu}};
  rep.finish();
  return rep;
}

/// Discrete Lemma-type orthogonality for psi = phi_k(r) Y_k: angular means of
/// Y_k vanish, and the mode-0 Green identity tau0 int z kappa = flux(z) holds.
inline std::vector<CheckReport> ortog_check(const GroundStateSample& s, const GroupSpec& group, int k) {
  require(k >= 1 && group.admits(k), "orthogonality check needs an admitted mode k >= 1");
  const int N = s.params.N;
  const RadialLinearization lin = radial_linearization(s);
  const RadialProfile phi = solve_mode_extension(s.params, s.grid, s.u, k, group);
  const auto w = s.grid->weights();
  double radial = 0.0;
  for (std::size_t j = 0; j < phi.size(); ++j) radial += w[j] * phi.values[j] * lin.z.values[j];
  // angular mean of a degree-k harmonic: cos(k theta) for N = 2, Gegenbauer zonal for N >= 3
  double angular = 0.0;
  if (N == 2) {
    const int L = 4 * k;
    for (int l = 0; l < L; ++l) angular += std::cos(k * 2.0 * std::numbers::pi * (l + 0.5) / L) / L;
  } else {
    const double alpha = 0.5 * (N - 2);
    const GaussRule rule = gauss_legendre(k + N + 8);
    double num = 0.0, den = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double x = rule.nodes[q], wt = rule.weights[q] * std::pow(1.0 - x * x, 0.5 * (N - 3));
      double c0 = 1.0, c1 = 2.0 * alpha * x;
      for (int n = 2; n <= k; ++n) {
        const double c2 = (2.0 * (n + alpha - 1.0) * x * c1 - (n + 2.0 * alpha - 2.0) * c0) / n;
        c0 = c1;
        c1 = c2;
      }
      num += wt * (k == 0 ? 1.0 : c1);
      den += wt;
    }
    angular = num / den;
  }
  std::vector<CheckReport> out;
  std::ostringstream in;
  in << "N=" << N << " p=" << s.params.p << " lambda=" << s.params.lambda << " k=" << k;
  CheckReport a;
  a.name = "ortog_psi_z";
  a.inputs = in.str();
  a.lhs = std::abs(angular * radial);
  a.rhs = 1e-8;
  a.margin = a.rhs - a.lhs;
  a.details = {{"radial_factor", radial}, {"angular_mean", angular}};
  a.finish();
  out.push_back(a);
  CheckReport b;
  b.name = "ortog_flux_mean";
  b.inputs = in.str();
  b.lhs = std::abs(angular * phi.boundary_slope);
  b.rhs = 1e-8;
  b.margin = b.rhs - b.lhs;
  b.details = {{"radial_slope", phi.boundary_slope}, {"angular_mean", angular}};
  b.finish();
  out.push_back(b);
  // k = 0 counterpart: the radial factors do not vanish, the Green identity holds
  const RadialProfile kappa = solve_kappa(s.params, s.grid, s.u);
  const DivergenceOperator op(s.grid, s.params.lambda,
                              linearized_potential(s.u, s.params.p, s.params.lambda, 0.0));
  double zk = 0.0;
  for (std::size_t j = 0; j < kappa.size(); ++j) zk += w[j] * lin.z.values[j] * kappa.values[j];
  const double flux = -op.off()[0] * lin.z.values[1];
  CheckReport c;
  c.name = "ortog_green_mode0";
  c.inputs = in.str();
  c.lhs = lin.tau0 * zk;
  c.rhs = flux;
  c.margin = 1e-8 - std::abs(c.lhs - c.rhs) / std::max(std::abs(c.rhs), 1e-300);
  c.details = {{"int_z_kappa", zk}, {"tau0", lin.tau0}};
  c.finish();
  out.push_back(c);
  return out;
}

/// Nehari, mountain-pass and boundary identities for one radial solve.
inline std::vector<CheckReport> radial_identity_checks(const GroundStateSample& s) {
  const EnergyReport e = energy_report(s.params, s.grid, s.u);
  std::ostringstream in;
  in << "N=" << s.params.N << " p=" << s.params.p << " lambda=" << s.params.lambda << " M=" << s.grid->M();
  const double scale = std::max(e.norm_squared, 1e-300);
  std::vector<CheckReport> out;
  CheckReport a;
  a.name = "nehari";
  a.inputs = in.str();
  a.lhs = e.nehari_gap / scale;
  a.rhs = 1e-8;
  a.margin = a.rhs - a.lhs;
  a.details = {{"norm_squared", e.norm_squared}, {"nonlinear", e.nonlinear}};
  a.finish();
  out.push_back(a);
  CheckReport b;
  b.name = "mountain_pass";
  b.inputs = in.str();
  b.lhs = e.mp_identity_gap / scale;
  b.rhs = 1e-8;
  b.margin = b.rhs - b.lhs;
  b.details = {{"energy", e.energy}};
  b.finish();
  out.push_back(b);
  // boundary identity u''(1) + (N-1) u'(1) = 0, first order in the boundary spacing
  CheckReport c;
  c.name = "boundary_identity";
  c.inputs = in.str();
  const double h0 = s.grid->spacing(0);
  c.lhs = std::abs(boundary_identity_defect(s.u)) / std::abs(s.u.boundary_slope);
  c.rhs = 4.0 * h0;
  c.margin = c.rhs - c.lhs;
  c.details = {{"boundary_spacing", h0}, {"boundary_slope", s.u.boundary_slope}};
  c.finish();
  out.push_back(c);
  return out;
}

/// Whole-space comparison data for the R -> 0 limit.
struct LimitReport {
  int N = 2;
  double p = 3.0;
  std::vector<double> radii;
  std::vector<double> u_errors;
  std::vector<double> z_errors;
  std::vector<double> tau0;
  double tau_wholespace = 0.0;
  double U0 = 0.0;
  bool u_decreasing = false;
  bool z_decreasing = false;
  bool tau_bounded = false;
  bool Z_positive = false;
  bool Z_tail_monotone = false;
  bool pass() const { return u_decreasing && z_decreasing && tau_bounded && Z_positive && Z_tail_monotone; }
};

/// Weakly decreasing with at most one increase of at most 5%, and overall decrease.
inline bool weakly_decreasing(const std::vector<double>& e) {
  int violations = 0;
  for (std::size_t i = 0; i + 1 < e.size(); ++i)
    if (e[i + 1] > e[i]) {
      ++violations;
      if (e[i + 1] > 1.05 * e[i]) return false;
    }
  return violations <= 1 && e.size() >= 2 && e.back() < e.front();
}

struct LimitOptions {
  GridPolicy exterior{};
  int wholespace_M = 4000;
  double wholespace_stretch = 2.0;
  double wholespace_r_max = 41.0;
};

/// u_R(s/R) -> U and z_R(s/R) -> Z in weighted H^1 on a common whole-space grid.
inline LimitReport limit_check(int N, double p, const std::vector<double>& radii, const LimitOptions& opt = {}) {
  require(radii.size() >= 2, "limit check needs at least two radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    require(std::isfinite(radii[i]) && radii[i] > 0.0 && radii[i] <= 1.0, "radii must lie in (0, 1]");
    if (i > 0) require(radii[i] < radii[i - 1], "radii must decrease");
  }
  LimitReport rep;
  rep.N = N;
  rep.p = p;
  rep.radii = radii;
  auto ws = std::make_shared<const RadialGrid>(
      build_wholespace_grid(N, opt.wholespace_M, opt.wholespace_stretch, opt.wholespace_r_max));
  const RadialProfile U = solve_wholespace_ground_state(N, p, ws);
  rep.U0 = U.values[0];
  const DivergenceOperator zop(ws, 1.0, linearized_potential(U, p, 1.0, 0.0), InnerBoundary::regular);
  auto zp = bottom_eigenpairs(zop, 1);
  rep.tau_wholespace = zp[0].tau;
  std::vector<double> Z = zp[0].phi.values;
  {
    const double nz = weighted_h1_norm(*ws, Z);
    for (double& v : Z) v /= nz;
  }
  rep.Z_positive = std::all_of(Z.begin(), Z.end() - 1, [](double v) { return v > 0.0; });
  const std::size_t zmax = static_cast<std::size_t>(std::max_element(Z.begin(), Z.end()) - Z.begin());
  rep.Z_tail_monotone = true;
  for (std::size_t j = zmax; j + 1 < Z.size(); ++j)
    if (Z[j + 1] > Z[j]) rep.Z_tail_monotone = false;

  const auto s_nodes = ws->nodes();
  for (double R : radii) {
    const GroundStateSample s = ground_state_at(N, p, 1.0 / (R * R), opt.exterior);
    const RadialLinearization lin = radial_linearization(s);
    rep.tau0.push_back(lin.tau0);
    std::vector<double> x(s.grid->size());
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = R * s.grid->node(j);
    auto pull = [&](const std::vector<double>& f) {
      std::vector<double> g(ws->size(), 0.0);
      for (std::size_t j = 0; j < g.size(); ++j) {
        const double sj = s_nodes[j];
        if (sj >= R && sj <= x.back()) g[j] = detail::interpolate(x, f, sj);
      }
      return g;
    };
    std::vector<double> du = pull(s.u.values), dz = pull(lin.z.values);
    for (std::size_t j = 0; j < du.size(); ++j) du[j] -= U.values[j];
    const double nz = weighted_h1_norm(*ws, dz);
    for (std::size_t j = 0; j < dz.size(); ++j) dz[j] = dz[j] / nz - Z[j];
    rep.u_errors.push_back(weighted_h1_norm(*ws, du));
    rep.z_errors.push_back(weighted_h1_norm(*ws, dz));
  }
  rep.u_decreasing = weakly_decreasing(rep.u_errors);
  rep.z_decreasing = weakly_decreasing(rep.z_errors);
  const double ceiling = 0.5 * rep.tau_wholespace;
  rep.tau_bounded = rep.tau_wholespace < 0.0 &&
                    std::all_of(rep.tau0.begin(), rep.tau0.end(), [&](double t) { return t <= ceiling; });
  return rep;
}

inline std::vector<CheckReport> limit_reports(const LimitReport& rep) {
  std::ostringstream in;
  in << "N=" << rep.N << " p=" << rep.p << " radii=" << rep.radii.size();
  auto make = [&](const std::string& name, double lhs, double rhs, bool ok) {
    CheckReport c;
    c.name = name;
    c.inputs = in.str();
    c.lhs = lhs;
    c.rhs = rhs;
    c.margin = ok ? std::max(rhs - lhs, 0.0) : -1.0;
    c.finish();
    return c;
  };
  std::vector<CheckReport> out;
  auto add_series = [](CheckReport& c, const std::string& key, const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) c.details.emplace_back(key + "_" + std::to_string(i), v[i]);
  };
  CheckReport a = make("limit_u", rep.u_errors.back(), rep.u_errors.front(), rep.u_decreasing);
  add_series(a, "error", rep.u_errors);
  add_series(a, "R", rep.radii);
  CheckReport b = make("limit_z", rep.z_errors.back(), rep.z_errors.front(), rep.z_decreasing);
  add_series(b, "error", rep.z_errors);
  const double worst = *std::max_element(rep.tau0.begin(), rep.tau0.end());
  CheckReport c = make("limit_tau0", worst, 0.5 * rep.tau_wholespace, rep.tau_bounded);
  add_series(c, "tau0", rep.tau0);
  c.details.emplace_back("tau_wholespace", rep.tau_wholespace);
  CheckReport d = make("limit_Z_shape", 0.0, 0.0, rep.Z_positive && rep.Z_tail_monotone);
  d.details = {{"positive", rep.Z_positive ? 1.0 : 0.0}, {"tail_monotone", rep.Z_tail_monotone ? 1.0 : 0.0}};
  out = {a, b, c, d};
  return out;
}

/// Mode-wise positivity of the boundary-corrected form at sampled large
/// lambda: tau_min(k) > 0 and sigma_k > 0 for the first admitted modes.
/// Finitely many samples; this does not certify the asymptotic statement.
inline CheckReport key_positivity_check(const GroundStateSample& s, const GroupSpec& group, int modes = 4) {
  CheckReport c;
  c.name = "key_positivity";
  std::ostringstream in;
  in << "N=" << s.params.N << " p=" << s.params.p << " lambda=" << s.params.lambda << " group=" << group.name();
  c.inputs = in.str();
  double worst = std::numeric_limits<double>::infinity();
  const auto& ks = group.mode_indices();
  for (int i = 0; i < std::min<int>(modes, static_cast<int>(ks.size())); ++i) {
    const ModeOperator op = assemble_mode_operator(s.params, s.grid, s.u, ks[i], group);
    const double t = bottom_eigenvalue_bisection(op.op);
    const double sg = steklov_mode(op).sigma;
    c.details.emplace_back("tau_min_" + std::to_string(ks[i]), t);
    c.details.emplace_back("sigma_" + std::to_string(ks[i]), sg);
    worst = std::min({worst, t, sg});
  }
  c.lhs = 0.0;
  c.rhs = worst;
  c.margin = worst;
  c.tolerance = 0.0;
  c.finish();
  if (!(worst > 0.0)) c.pass = false;
  return c;
}

/// Runs independent tasks on up to `jobs` threads; result order follows input order.
template <typename T>
std::vector<T> parallel_map(std::size_t count, int jobs, const std::function<T(std::size_t)>& task) {
  std::vector<T> out(count);
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(count, jobs > 0 ? jobs : 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = task(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < count; i += workers) {
        try {
          out[i] = task(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

/// Seeded Hardy family over (N, lambda, r) in {2,3} x {0.5,1,5} x {1,2}.
inline std::vector<CheckReport> hardy_family(std::size_t count, std::uint64_t seed, int jobs = 1) {
  static const int Ns[] = {2, 3};
  static const double lambdas[] = {0.5, 1.0, 5.0};
  static const double rs[] = {1.0, 2.0};
  return parallel_map<CheckReport>(count, jobs, [&](std::size_t i) {
    const int N = Ns[i % 2];
    const double lambda = lambdas[(i / 2) % 3];
    const double r = rs[(i / 6) % 2];
    const std::uint64_t s = detail::splitmix64(seed ^ (0x6861726479ULL + i));
    return hardy_check(N, lambda, r, random_piecewise_linear(r, s), s);
  });
}

/// Seeded trace family: random profiles at the boundary case mu = 2N and at
/// higher admitted modes, N in {2, 3}, R in {0.5, 1, 2}.
inline std::vector<CheckReport> trace_family(std::size_t count, std::uint64_t seed, int jobs = 1) {
  static const double Rs[] = {0.5, 1.0, 2.0};
  const GroupSpec g2 = GroupSpec::product_orthogonal(2, 1);
  const GroupSpec g3 = GroupSpec::product_orthogonal(3, 1);
  return parallel_map<CheckReport>(count, jobs, [&](std::size_t i) {
    const int N = 2 + static_cast<int>(i % 2);
    const GroupSpec& g = N == 2 ? g2 : g3;
    const double R = Rs[(i / 2) % 3];
    const int k = g.mode_indices()[(i / 6) % 3];
    const std::uint64_t s = detail::splitmix64(seed ^ (0x7472616365ULL + i));
    return trace_check(N, R, random_piecewise_linear(R, s), k, g, s);
  });
}

}  // namespace ebl
