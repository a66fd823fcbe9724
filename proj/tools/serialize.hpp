#pragma once

#include <string>
#include <vector>

#include "config.hpp"

namespace ebl::cli {

inline json to_json(const CheckReport& c) {
  json j;
  j["name"] = c.name;
  j["inputs"] = c.inputs;
  j["lhs"] = c.lhs;
  j["rhs"] = c.rhs;
  j["margin"] = c.margin;
  j["tolerance"] = c.tolerance;
  j["pass"] = c.pass;
  j["seed"] = c.seed;
  json d = json::object();
  for (const auto& [k, v] : c.details) d[k] = v;
  j["details"] = d;
  return j;
}

inline json suite_json(const std::string& suite, const std::vector<CheckReport>& checks) {
  json j;
  j["suite"] = suite;
  j["checks"] = json::array();
  int passed = 0;
  for (const auto& c : checks) {
    j["checks"].push_back(to_json(c));
    passed += c.pass ? 1 : 0;
  }
  j["summary"] = {{"total", checks.size()}, {"passed", passed}, {"failed", static_cast<int>(checks.size()) - passed}};
  return j;
}

inline json to_json(const SigmaSample& s) {
  return {{"lambda", s.lambda}, {"sigma", s.sigma}, {"gamma", s.gamma}, {"tau0", s.tau0}};
}

inline json to_json(const BifurcationResult& b) {
  json j;
  j["group"] = b.group;
  j["N"] = b.N;
  j["p"] = b.p;
  j["i1"] = b.i1;
  j["kernel_multiplicity"] = b.kernel_multiplicity;
  j["lambda0"] = b.lambda0;
  j["lambda_star"] = b.lambda_star;
  j["r_star"] = b.r_star;
  j["bracket"] = json::array({b.bracket_lo, b.bracket_hi});
  j["lambda0_tol"] = b.lambda0_tol;
  j["lambda_star_tol"] = b.lambda_star_tol;
  j["bisection_steps"] = b.bisection_steps;
  j["sigma_at_star"] = b.sigma_at_star;
  json h = json::array();
  for (const auto& [k, s] : b.higher_sigma) h.push_back({{"k", k}, {"sigma", s}});
  j["higher_sigma"] = h;
  j["kernel_isolated"] = b.kernel_isolated;
  return j;
}

inline json to_json(const DefectReport& r) {
  json j;
  j["lambda"] = r.lambda;
  j["i1"] = r.i1;
  j["K"] = r.K;
  j["sigma"] = r.sigma;
  j["boundary_slope"] = r.boundary_slope;
  j["epsilons"] = r.epsilons;
  j["defect_norms"] = r.defect_norms;
  j["linearization_errors"] = r.linearization_errors;
  j["leading_coeffs"] = r.leading_coeffs;
  j["boundary_means"] = r.boundary_means;
  j["residuals"] = r.residuals;
  j["error_orders"] = r.error_orders;
  j["norm_ratios"] = r.norm_ratios;
  j["observed_order"] = r.observed_order;
  return j;
}

inline json to_json(const SteklovResult& s) {
  return {{"lambda", s.lambda},       {"k", s.k},
          {"mu", s.mu},               {"gamma", s.gamma},
          {"gamma_slope", s.gamma_slope}, {"gamma_form", s.gamma_form},
          {"sigma", s.sigma},         {"slope_vs_form_gap", s.slope_vs_form_gap},
          {"boundary_spacing", s.boundary_spacing}, {"morse_index", s.morse_index}};
}

inline json to_json(const EnergyReport& e) {
  return {{"energy", e.energy},
          {"physical_energy", e.physical_energy},
          {"norm_squared", e.norm_squared},
          {"nonlinear", e.nonlinear},
          {"nehari_gap", e.nehari_gap},
          {"mp_identity_gap", e.mp_identity_gap}};
}

}  // namespace ebl::cli
