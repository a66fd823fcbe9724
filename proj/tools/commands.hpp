#pragma once

#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "config.hpp"
#include "io.hpp"
#include "serialize.hpp"

namespace ebl::cli {

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_solver = 2, exit_bracket = 3, exit_check_failed = 4, exit_usage = 64 };

struct Context {
  RunConfig cfg;
  fs::path out;
  int jobs = 1;
  bool use_cache = true;
  std::string suite;  // check only
};

inline SuiteConfig suite_config(const Context& ctx) {
  const RunConfig& c = ctx.cfg;
  SuiteConfig s;
  s.N = c.N;
  s.p = c.p;
  s.group = c.group;
  s.grid = c.grid;
  s.relative_tol = c.relative_tol;
  s.seed = c.seed;
  s.hardy_count = c.hardy_count;
  s.trace_count = c.trace_count;
  s.radii = c.radii;
  s.epsilons = c.epsilons;
  s.defect_lambda_factors = c.defect_lambda_factors;
  s.K = c.K;
  s.cutoff = Cutoff{c.cutoff_in, c.cutoff_out};
  s.jobs = ctx.jobs;
  return s;
}

inline BifurcateOptions bifurcate_options(const RunConfig& c) {
  BifurcateOptions o;
  o.lambda0_bracket = c.lambda0_bracket;
  o.lambda_star_bracket = c.lambda_star_bracket;
  o.relative_tol = c.relative_tol;
  o.sigma_samples = c.sigma_samples;
  o.sigma_span = c.sigma_span;
  return o;
}

/// Modes reported by spectrum and steklov: the configured one, or 0 plus the
/// first eigen_count admitted modes.
inline std::vector<int> reported_modes(const RunConfig& c, const GroupSpec& g, bool with_zero) {
  if (c.mode) {
    if (!g.admits(*c.mode)) throw ConfigError("mode " + std::to_string(*c.mode) + " is not admitted by " + g.name());
    return {*c.mode};
  }
  std::vector<int> out;
  if (with_zero) out.push_back(0);
  for (int k : g.mode_indices()) {
    if (static_cast<int>(out.size()) >= c.eigen_count + (with_zero ? 1 : 0)) break;
    out.push_back(k);
  }
  return out;
}

inline json grid_json(const RadialGrid& g) {
  return {{"size", g.size()}, {"r_min", g.r_min()}, {"r_max", g.r_max()}, {"closure", to_string(g.closure())}};
}

inline json shape_json(const DomainShape& s) {
  return {{"R", s.R}, {"epsilon", s.epsilon}, {"mode", s.mode}, {"N", s.N}, {"points", s.angle.size()},
          {"perturbation_mean", s.perturbation_mean}};
}

inline std::string shape_csv(const DomainShape& s, const json& config) {
  CsvTable t({s.N == 2 ? "theta" : "polar_angle", "radius", "x", "y"}, config);
  for (std::size_t j = 0; j < s.angle.size(); ++j) t.row({s.angle[j], s.radius[j], s.x[j], s.y[j]});
  return t.str();
}

/// Runs body unless an identical earlier run is on disk; body returns the exit code.
template <typename Body>
int with_cache(const Context& ctx, const std::string& command, const json& config, Body body) {
  OutputSet set(ctx.out, command, config, ctx.use_cache);
  if (auto code = set.cached()) {
    std::cout << command << ": cached (" << set.key() << ")\n";
    return *code;
  }
  const int code = body(set);
  set.commit(code);
  return code;
}

inline int cmd_radial(const Context& ctx) {
  const json config = to_json(ctx.cfg);
  return with_cache(ctx, "radial", config, [&](OutputSet& set) {
    const RunConfig& c = ctx.cfg;
    const GroundStateSample s = ground_state_at(c.N, c.p, c.resolved_lambda(), c.grid);
    const auto du = s.u.derivative();
    CsvTable t({"r", "u", "u_prime"}, config);
    for (std::size_t j = 0; j < s.u.size(); ++j) t.row({s.grid->node(j), s.u.values[j], du[j]});
    json meta;
    meta["params"] = {{"N", s.params.N}, {"p", s.params.p}, {"lambda", s.params.lambda}, {"R", s.params.R}};
    meta["grid"] = grid_json(*s.grid);
    meta["residual_norm"] = s.u.residual_norm;
    meta["iterations"] = s.u.iterations;
    meta["boundary_slope"] = s.u.boundary_slope;
    meta["boundary_identity_defect"] = boundary_identity_defect(s.u);
    meta["energy"] = to_json(energy_report(s.params, s.grid, s.u));
    set.write("u.csv", t.str());
    set.write("u.meta.json", json_document(meta, config));
    std::cout << "radial: u'(1) = " << s.u.boundary_slope << ", residual " << sci(s.u.residual_norm) << "\n";
    return int(exit_ok);
  });
}

inline int cmd_ground_state(const Context& ctx) {
  const json config = to_json(ctx.cfg);
  return with_cache(ctx, "ground-state", config, [&](OutputSet& set) {
    const RunConfig& c = ctx.cfg;
    const double r_max = 1.0 + c.grid.r_max_factor;
    auto ws = std::make_shared<const RadialGrid>(build_wholespace_grid(c.N, 2 * c.grid.M, c.grid.stretch, r_max));
    const RadialProfile U = solve_wholespace_ground_state(c.N, c.p, ws);
    const DivergenceOperator zop(ws, 1.0, linearized_potential(U, c.p, 1.0, 0.0), InnerBoundary::regular);
    const auto pairs = bottom_eigenpairs(zop, 2);
    std::vector<double> Z = pairs[0].phi.values;
    const double nz = weighted_h1_norm(*ws, Z);
    for (double& v : Z) v /= nz;
    const auto dU = U.derivative();
    CsvTable t({"r", "U", "U_prime", "Z"}, config);
    for (std::size_t j = 0; j < U.size(); ++j) t.row({ws->node(j), U.values[j], dU[j], Z[j]});
    json meta;
    meta["grid"] = grid_json(*ws);
    meta["U0"] = U.values[0];
    meta["residual_norm"] = U.residual_norm;
    meta["iterations"] = U.iterations;
    meta["tau0"] = pairs[0].tau;
    meta["tau1"] = pairs[1].tau;
    set.write("U.csv", t.str());
    set.write("U.meta.json", json_document(meta, config));
    std::cout << "ground-state: U(0) = " << U.values[0] << ", tau0 = " << pairs[0].tau << "\n";
    return int(exit_ok);
  });
}

inline int cmd_spectrum(const Context& ctx) {
  const json config = to_json(ctx.cfg);
  return with_cache(ctx, "spectrum", config, [&](OutputSet& set) {
    const RunConfig& c = ctx.cfg;
    const GroupSpec g = c.group_spec();
    const GroundStateSample s = ground_state_at(c.N, c.p, c.resolved_lambda(), c.grid);
    CsvTable t({"lambda", "mode_k", "mu_k", "tau_0", "tau_1"}, config);
    json modes = json::array();
    for (int k : reported_modes(c, g, true)) {
      const ModeOperator op = assemble_mode_operator(s.params, s.grid, s.u, k, g);
      const auto pairs = bottom_eigenpairs(op, std::max(2, c.eigen_count));
      t.row({s.params.lambda, double(k), op.mu, pairs[0].tau, pairs[1].tau});
      json m;
      m["k"] = k;
      m["mu"] = op.mu;
      m["tau"] = json::array();
      m["residual"] = json::array();
      for (const auto& e : pairs) {
        m["tau"].push_back(e.tau);
        m["residual"].push_back(e.residual);
      }
      m["negative_count"] = dirichlet_morse_index(op);
      modes.push_back(m);
    }
    const RadialLinearization lin = radial_linearization(s);
    const auto kappa = solve_kappa(s.params, s.grid, s.u);
    CsvTable z({"r", "z", "kappa"}, config);
    for (std::size_t j = 0; j < s.u.size(); ++j) z.row({s.grid->node(j), lin.z.values[j], kappa.values[j]});
    json doc;
    doc["lambda"] = s.params.lambda;
    doc["group"] = g.name();
    doc["modes"] = modes;
    doc["tau0"] = lin.tau0;
    doc["tau1"] = lin.tau1;
    doc["kappa_slope"] = kappa.boundary_slope;
    set.write("spectrum.csv", t.str());
    set.write("z.csv", z.str());
    set.write("spectrum.json", json_document(doc, config));
    std::cout << "spectrum: tau0 = " << lin.tau0 << ", tau1 = " << lin.tau1 << "\n";
    return int(exit_ok);
  });
}

inline int cmd_steklov(const Context& ctx) {
  const json config = to_json(ctx.cfg);
  return with_cache(ctx, "steklov", config, [&](OutputSet& set) {
    const RunConfig& c = ctx.cfg;
    const GroupSpec g = c.group_spec();
    const GroundStateSample s = ground_state_at(c.N, c.p, c.resolved_lambda(), c.grid);
    const std::vector<int> modes = reported_modes(c, g, false);
    CsvTable t({"lambda", "mode_k", "mu_k", "gamma", "gamma_slope", "sigma", "morse_index"}, config);
    std::vector<std::string> cols{"r"};
    for (int k : modes) cols.push_back("phi_" + std::to_string(k));
    CsvTable phi(cols, config);
    std::vector<SteklovResult> results;
    json list = json::array();
    for (int k : modes) {
      results.push_back(steklov_mode(s.params, s.grid, s.u, k, g));
      const auto& r = results.back();
      t.row({r.lambda, double(k), r.mu, r.gamma, r.gamma_slope, r.sigma, double(r.morse_index)});
      list.push_back(to_json(r));
    }
    for (std::size_t j = 0; j < s.u.size(); ++j) {
      std::vector<double> row{s.grid->node(j)};
      for (const auto& r : results) row.push_back(r.phi.values[j]);
      phi.row(row);
    }
    set.write("steklov.csv", t.str());
    set.write("phi.csv", phi.str());
    set.write("steklov.json", json_document({{"group", g.name()}, {"modes", list}}, config));
    std::cout << "steklov: sigma_" << modes.front() << " = " << results.front().sigma << "\n";
    return int(exit_ok);
  });
}

inline std::string sigma_curve_csv(const std::vector<SigmaSample>& curve, const json& config) {
  CsvTable t({"lambda", "sigma_i1", "gamma_i1", "tau0_mode0"}, config);
  for (const auto& s : curve) t.row({s.lambda, s.sigma, s.gamma, s.tau0});
  return t.str();
}

inline int cmd_bifurcate(const Context& ctx) {
  const json config = to_json(ctx.cfg);
  return with_cache(ctx, "bifurcate", config, [&](OutputSet& set) {
    const RunConfig& c = ctx.cfg;
    const GroupSpec g = c.group_spec();
    BifurcationResult b;
    try {
      b = bifurcate(c.N, c.p, c.grid, g, bifurcate_options(c));
    } catch (const NoBracket& e) {
      // keep what a plot needs to diagnose the bracket: sigma over a wide range
      const double lo = c.lambda0_bracket ? c.lambda0_bracket->first : (c.p - 1.0) / g.mu(g.i1());
      const double hi = c.lambda_star_bracket ? c.lambda_star_bracket->second : 64.0 * lo;
      const int n = std::max(c.sigma_samples, 2);
      std::vector<SigmaSample> curve;
      for (int i = 0; i < n; ++i) {
        const double lam = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1));
        try {
          curve.push_back(sigma_sample(c.N, c.p, lam, c.grid, g, g.i1()));
        } catch (const Error&) {
        }
      }
      set.write("sigma_curve.csv", sigma_curve_csv(curve, config));
      set.write("bifurcation.json",
                json_document({{"status", "no_bracket"}, {"message", e.what()}, {"group", g.name()}}, config));
      std::cerr << "bifurcate: " << e.what() << "\n";
      return int(exit_bracket);
    }
    json doc = to_json(b);
    doc["status"] = "ok";
    doc["grid_policy"] = config["grid"];
    doc["relative_tol"] = c.relative_tol;
    set.write("sigma_curve.csv", sigma_curve_csv(b.sigma_curve, config));
    set.write("bifurcation.json", json_document(doc, config));
    if (c.shape_epsilon < 1.0 / (1.0 + g.i1() * g.i1()))
      set.write("shape.csv", shape_csv(export_domain_shape(b, g, c.shape_epsilon, c.shape_points), config));
    std::cout << "bifurcate: Lambda0 = " << b.lambda0 << ", Lambda* = " << b.lambda_star << ", R* = " << b.r_star
              << "\n";
    return int(exit_ok);
  });
}

inline int cmd_defect(const Context& ctx) {
  const json config = to_json(ctx.cfg);
  return with_cache(ctx, "defect", config, [&](OutputSet& set) {
    const RunConfig& c = ctx.cfg;
    if (c.N != 2) throw ConfigError("defect runs in dimension 2");
    const GroupSpec g = c.group_spec();
    std::vector<double> lambdas;
    json star = nullptr;
    if (c.has_lambda()) {
      lambdas.push_back(c.resolved_lambda());
    } else {
      BifurcateOptions bo = bifurcate_options(c);
      bo.sigma_samples = 0;
      const BifurcationResult b = bifurcate(c.N, c.p, c.grid, g, bo);
      star = b.lambda_star;
      for (double f : c.defect_lambda_factors) lambdas.push_back(f * b.lambda_star);
    }
    DefectOptions opt;
    opt.K = c.K;
    opt.cutoff = Cutoff{c.cutoff_in, c.cutoff_out};
    opt.keep_fields = true;
    auto reports = parallel_map<DefectReport>(lambdas.size(), ctx.jobs, [&](std::size_t i) {
      return linearization_check(2, c.p, lambdas[i], c.grid, g, c.epsilons, opt);
    });
    CsvTable t({"lambda", "epsilon", "theta", "F_value"}, config);
    json list = json::array();
    for (const auto& r : reports) {
      list.push_back(to_json(r));
      for (std::size_t i = 0; i < r.fields.size(); ++i)
        for (std::size_t l = 0; l < r.fields[i].theta.size(); ++l)
          t.row({r.lambda, r.epsilons[i], r.fields[i].theta[l], r.fields[i].values[l]});
      std::cout << "defect: lambda = " << r.lambda << ", observed order " << r.observed_order << "\n";
    }
    set.write("defect.json", json_document({{"group", g.name()}, {"lambda_star", star}, {"reports", list}}, config));
    set.write("defect_theta.csv", t.str());
    return int(exit_ok);
  });
}

inline int cmd_shape(const Context& ctx) {
  const json config = to_json(ctx.cfg);
  return with_cache(ctx, "shape", config, [&](OutputSet& set) {
    const RunConfig& c = ctx.cfg;
    const GroupSpec g = c.group_spec();
    double r_star = 0.0;
    if (c.has_lambda()) {
      r_star = 1.0 / std::sqrt(c.resolved_lambda());
    } else {
      BifurcateOptions bo = bifurcate_options(c);
      bo.sigma_samples = 0;
      r_star = bifurcate(c.N, c.p, c.grid, g, bo).r_star;
    }
    const DomainShape s = export_domain_shape(r_star, g, c.shape_epsilon, c.shape_points);
    set.write("shape.csv", shape_csv(s, config));
    set.write("shape.json", json_document(shape_json(s), config));
    std::cout << "shape: R = " << s.R << ", epsilon = " << s.epsilon << ", " << s.angle.size() << " points\n";
    return int(exit_ok);
  });
}

inline int cmd_limit(const Context& ctx) {
  const json config = to_json(ctx.cfg);
  return with_cache(ctx, "limit", config, [&](OutputSet& set) {
    const RunConfig& c = ctx.cfg;
    LimitOptions opt;
    opt.exterior = c.grid;
    const LimitReport rep = limit_check(c.N, c.p, c.radii, opt);
    CsvTable t({"R", "u_error", "z_error", "tau0"}, config);
    for (std::size_t i = 0; i < rep.radii.size(); ++i)
      t.row({rep.radii[i], rep.u_errors[i], rep.z_errors[i], rep.tau0[i]});
    json doc;
    doc["U0"] = rep.U0;
    doc["tau_wholespace"] = rep.tau_wholespace;
    doc["u_decreasing"] = rep.u_decreasing;
    doc["z_decreasing"] = rep.z_decreasing;
    doc["tau_bounded"] = rep.tau_bounded;
    doc["Z_positive"] = rep.Z_positive;
    doc["Z_tail_monotone"] = rep.Z_tail_monotone;
    doc["pass"] = rep.pass();
    set.write("limit.csv", t.str());
    set.write("limit.json", json_document(doc, config));
    std::cout << "limit: " << (rep.pass() ? "all limits behave" : "limit check failed") << "\n";
    return int(exit_ok);
  });
}

inline int cmd_check(const Context& ctx) {
  json config = to_json(ctx.cfg);
  config["suite"] = ctx.suite;
  return with_cache(ctx, "check-" + ctx.suite, config, [&](OutputSet& set) {
    const auto checks = run_suite(ctx.suite, suite_config(ctx));
    int failed = 0;
    for (const auto& r : checks)
      if (!r.pass) {
        ++failed;
        std::cout << "FAIL " << r.name << " [" << r.inputs << "] margin " << sci(r.margin) << "\n";
      }
    set.write("check_" + ctx.suite + ".json", json_document(suite_json(ctx.suite, checks), config));
    std::cout << "check " << ctx.suite << ": " << checks.size() - failed << "/" << checks.size() << " passed\n";
    return failed == 0 ? int(exit_ok) : int(exit_check_failed);
  });
}

}  // namespace ebl::cli
