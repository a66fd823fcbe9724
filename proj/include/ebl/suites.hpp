#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ebl/perturbed.hpp"
#include "ebl/steklov.hpp"
#include "ebl/verification.hpp"

namespace ebl {

struct SuiteConfig {
  int N = 2;
  double p = 3.0;
  std::string group = "product-orthogonal(1)";
  GridPolicy grid{};
  double relative_tol = 1e-10;
  std::uint64_t seed = 20240611;
  int hardy_count = 1000;
  int trace_count = 200;
  std::vector<double> radii{1.0, 0.5, 0.25, 0.125};
  std::vector<double> epsilons{1e-2, 5e-3, 2.5e-3};
  std::vector<double> defect_lambda_factors{1.2, 1.0};
  int K = 8;
  Cutoff cutoff{};
  int jobs = 1;

  GroupSpec group_spec() const { return GroupSpec::parse(group, N); }
};

using CheckTask = std::function<std::vector<CheckReport>()>;

inline std::vector<CheckReport> run_tasks(const std::vector<CheckTask>& tasks, int jobs) {
  auto parts = parallel_map<std::vector<CheckReport>>(tasks.size(), jobs, [&](std::size_t i) { return tasks[i](); });
  std::vector<CheckReport> out;
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

namespace detail {

inline CheckReport threshold_report(std::string name, std::string inputs, double value, double threshold,
                                    std::vector<std::pair<std::string, double>> details = {}) {
  CheckReport c;
  c.name = std::move(name);
  c.inputs = std::move(inputs);
  c.lhs = threshold;
  c.rhs = value;
  c.margin = value - threshold;
  c.details = std::move(details);
  c.finish();
  return c;
}

inline CheckReport bound_report(std::string name, std::string inputs, double value, double bound,
                                std::vector<std::pair<std::string, double>> details = {}) {
  CheckReport c;
  c.name = std::move(name);
  c.inputs = std::move(inputs);
  c.lhs = value;
  c.rhs = bound;
  c.margin = bound - value;
  c.details = std::move(details);
  c.finish();
  return c;
}

}  // namespace detail

/// Hardy and trace families, trace on computed mode profiles, G-deg witnesses.
inline std::vector<CheckReport> inequality_suite(const SuiteConfig& cfg) {
  const GroupSpec group = cfg.group_spec();
  std::vector<CheckTask> tasks;
  tasks.push_back([&] { return hardy_family(cfg.hardy_count, cfg.seed, cfg.jobs); });
  tasks.push_back([&] { return trace_family(cfg.trace_count, cfg.seed + 1, cfg.jobs); });
  for (double lam : {1.0, 25.0}) {
    tasks.push_back([&, lam] {
      std::vector<CheckReport> out;
      const GroundStateSample s = ground_state_at(cfg.N, cfg.p, lam, cfg.grid);
      for (int k : group.mode_indices()) {
        if (group.mu(k) < 2.0 * cfg.N) continue;
        const RadialProfile phi = solve_mode_extension(s.params, s.grid, s.u, k, group);
        CheckReport c = trace_check(cfg.N, 1.0, as_piecewise_linear(phi), k, group);
        c.name = "trace_mode_profile";
        c.inputs += " lambda=" + std::to_string(lam);
        out.push_back(c);
        if (out.size() >= 3) break;
      }
      return out;
    });
  }
  const double threshold = (cfg.p - 1.0) / group.mu(group.i1());
  for (double f : {0.2, 0.5, 0.8}) {
    tasks.push_back([&, f] {
      const GroundStateSample s = ground_state_at(cfg.N, cfg.p, f * threshold, cfg.grid);
      return std::vector<CheckReport>{gdeg_witness(s.params, s.grid, s.u, group)};
    });
  }
  return run_tasks(tasks, cfg.jobs);
}

/// Nehari, mountain-pass and boundary identities over (N, p, lambda), plus the
/// orthogonality identities of the first admitted mode.
inline std::vector<CheckReport> identity_suite(const SuiteConfig& cfg) {
  std::vector<CheckTask> tasks;
  for (int N : {2, 3})
    for (double p : {2.0, 3.0})
      for (double lam : {0.5, 1.0, 4.0, 25.0}) {
        if (N >= 3 && !(p < ProblemParams::critical_exponent(N))) continue;
        tasks.push_back([&cfg, N, p, lam] {
          const GroundStateSample s = ground_state_at(N, p, lam, cfg.grid);
          std::vector<CheckReport> out = radial_identity_checks(s);
          const GroupSpec g = GroupSpec::product_orthogonal(N, 1);
          for (auto& c : ortog_check(s, g, g.i1())) out.push_back(c);
          return out;
        });
      }
  return run_tasks(tasks, cfg.jobs);
}

/// R -> 0 limits and mode-wise positivity at sampled large lambda.
inline std::vector<CheckReport> limit_suite(const SuiteConfig& cfg) {
  const GroupSpec group = cfg.group_spec();
  std::vector<CheckTask> tasks;
  tasks.push_back([&] {
    LimitOptions opt;
    opt.exterior = cfg.grid;
    return limit_reports(limit_check(cfg.N, cfg.p, cfg.radii, opt));
  });
  tasks.push_back([&] {
    BifurcateOptions bo;
    bo.relative_tol = cfg.relative_tol;
    bo.sigma_samples = 0;
    const BifurcationResult b = bifurcate(cfg.N, cfg.p, cfg.grid, group, bo);
    std::vector<CheckReport> out;
    for (double f : {1.5, 2.0, 4.0}) {
      const GroundStateSample s = ground_state_at(cfg.N, cfg.p, f * b.lambda_star, cfg.grid);
      CheckReport c = key_positivity_check(s, group);
      c.details.emplace_back("lambda_over_lambda_star", f);
      out.push_back(c);
    }
    return out;
  });
  return run_tasks(tasks, cfg.jobs);
}

/// Full-PDE defect checks in dimension 2 at lambda = factor * Lambda*.
inline std::vector<CheckReport> defect_suite(const SuiteConfig& cfg) {
  require(cfg.N == 2, "the defect suite runs in dimension 2");
  const GroupSpec group = cfg.group_spec();
  BifurcateOptions bo;
  bo.relative_tol = cfg.relative_tol;
  bo.sigma_samples = 0;
  const BifurcationResult b = bifurcate(cfg.N, cfg.p, cfg.grid, group, bo);
  DefectOptions opt;
  opt.K = cfg.K;
  opt.cutoff = cfg.cutoff;
  std::vector<CheckTask> tasks;
  for (double f : cfg.defect_lambda_factors) {
    tasks.push_back([&, f] {
      const double lam = f * b.lambda_star;
      const DefectReport rep = linearization_check(2, cfg.p, lam, cfg.grid, group, cfg.epsilons, opt);
      std::ostringstream in;
      in << "N=2 p=" << cfg.p << " group=" << group.name() << " lambda=" << lam << " factor=" << f;
      std::vector<CheckReport> out;
      std::vector<std::pair<std::string, double>> d{{"lambda", lam}, {"sigma", rep.sigma}};
      for (std::size_t i = 0; i < rep.epsilons.size(); ++i) {
        d.emplace_back("eps_" + std::to_string(i), rep.epsilons[i]);
        d.emplace_back("defect_norm_" + std::to_string(i), rep.defect_norms[i]);
        d.emplace_back("linearization_error_" + std::to_string(i), rep.linearization_errors[i]);
      }
      if (f == 1.0) {
        // kernel direction: |F|/eps must shrink by >= 1.8 per halving of eps
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < rep.epsilons.size(); ++i) {
          const double halvings = std::log2(rep.epsilons[i] / rep.epsilons[i + 1]);
          worst = std::min(worst, std::pow(rep.norm_ratios[i], 1.0 / halvings));
        }
        out.push_back(detail::threshold_report("defect_kernel_decay", in.str(), worst, 1.8, d));
      } else {
        out.push_back(detail::threshold_report("defect_quadratic_order", in.str(), rep.observed_order, 1.8, d));
        // leading cosine coefficient against eps (-u'(1)) sigma within C eps^2
        const double target = -rep.boundary_slope * rep.sigma;
        double worst = 0.0;
        for (std::size_t i = 0; i < rep.epsilons.size(); ++i) {
          const double e = rep.epsilons[i];
          worst = std::max(worst, std::abs(rep.leading_coeffs[i] - e * target) / (e * e));
        }
        out.push_back(detail::bound_report("defect_leading_coefficient", in.str(), worst, 10.0 * std::abs(target) + 1.0,
                                           {{"target_slope", target}}));
      }
      if (f != 1.0) {
        // removed mean stays at u'(1) up to O(eps^2) away from the kernel
        double mean_dev = 0.0;
        for (std::size_t i = 0; i < rep.epsilons.size(); ++i) {
          const double e = rep.epsilons[i];
          mean_dev = std::max(mean_dev, std::abs(rep.boundary_means[i] + rep.boundary_slope) /
                                            std::abs(rep.boundary_slope) / (10.0 * e * e + 1e-6));
        }
        out.push_back(detail::bound_report("defect_mean_consistency", in.str(), mean_dev, 1.0));
      }
      return out;
    });
  }
  // v = 0 reproduces the radial solution and F = 0
  tasks.push_back([&] {
    const GroundStateSample s = ground_state_at(2, cfg.p, cfg.defect_lambda_factors.front() * b.lambda_star, cfg.grid);
    auto disc = std::make_shared<const MappedDisc>(s.grid, group.i1(), single_mode_perturbation(cfg.K, 0.0), cfg.K,
                                                   cfg.cutoff);
    const PerturbedSolution sol = solve_perturbed_dirichlet(s.params, disc, s.u);
    double dev = 0.0;
    for (std::size_t j = 0; j < s.u.size(); ++j) dev = std::max(dev, std::abs(sol.U(j, 0) - s.u.values[j]));
    dev = std::max(dev, sol.U.rightCols(cfg.K).cwiseAbs().maxCoeff());
    const DefectField F = defect(s.params, sol);
    std::vector<CheckReport> out;
    out.push_back(detail::bound_report("defect_identity_solution", "v=0", dev, 1e-10));
    out.push_back(detail::bound_report("defect_identity_F", "v=0", F.l2_norm, 1e-9));
    return out;
  });
  // truncation and cutoff sensitivity at the largest epsilon
  tasks.push_back([&] {
    const double lam = cfg.defect_lambda_factors.front() * b.lambda_star;
    const std::vector<double> eps{cfg.epsilons.front(), cfg.epsilons.front() / 2.0};
    DefectOptions wide = opt;
    wide.K = 2 * cfg.K;
    DefectOptions alt = opt;
    alt.cutoff = Cutoff{1.0 + 0.4 * (cfg.cutoff.t_in - 1.0), cfg.cutoff.t_out + 0.3};
    const DefectReport base = linearization_check(2, cfg.p, lam, cfg.grid, group, eps, opt);
    const DefectReport k2 = linearization_check(2, cfg.p, lam, cfg.grid, group, eps, wide);
    const DefectReport c2 = linearization_check(2, cfg.p, lam, cfg.grid, group, eps, alt);
    double dk = 0.0, dc = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
      dk = std::max(dk, std::abs(k2.defect_norms[i] - base.defect_norms[i]) / base.defect_norms[i]);
      dc = std::max(dc, std::abs(c2.defect_norms[i] - base.defect_norms[i]) / base.defect_norms[i]);
    }
    std::ostringstream in;
    in << "lambda=" << lam << " K=" << cfg.K;
    std::vector<CheckReport> out;
    out.push_back(detail::bound_report("defect_truncation_doubling", in.str(), dk, 0.01));
    out.push_back(detail::bound_report("defect_cutoff_sensitivity", in.str(), dc, 0.01,
                                       {{"alt_t_in", alt.cutoff.t_in}, {"alt_t_out", alt.cutoff.t_out}}));
    return out;
  });
  std::vector<CheckReport> out = run_tasks(tasks, cfg.jobs);
  std::ostringstream in;
  in << "group=" << group.name();
  out.push_back(detail::threshold_report("defect_lambda_star", in.str(), b.lambda_star - b.lambda0,
                                         0.0, {{"lambda0", b.lambda0}, {"lambda_star", b.lambda_star}}));
  return out;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"inequalities", "identities", "limits", "defect", "all"};
  return names;
}

inline std::vector<CheckReport> run_suite(const std::string& name, const SuiteConfig& cfg) {
  if (name == "inequalities") return inequality_suite(cfg);
  if (name == "identities") return identity_suite(cfg);
  if (name == "limits") return limit_suite(cfg);
  if (name == "defect") return defect_suite(cfg);
  if (name == "all") {
    std::vector<CheckReport> out;
    for (const char* s : {"inequalities", "identities", "limits", "defect"}) {
      auto part = run_suite(s, cfg);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }
  throw InvalidArgument("unknown suite '" + name + "'");
}

}  // namespace ebl
