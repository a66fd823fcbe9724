#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

using namespace ebl::cli;

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--" + flag + " expects comma-separated numbers, got '" + text + "'");
    }
  }
  if (out.empty()) throw ConfigError("--" + flag + " must not be empty");
  return out;
}

struct Flags {
  std::string config_path, out;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  bool no_cache = false;
  std::string suite;
  std::map<std::string, std::string> values;  // flag name -> raw text
};

/// Turns command-line values into a JSON overlay so they pass the same checks as a config file.
json overlay(const Flags& f) {
  json j = json::object();
  auto num = [&](const std::string& k) { return parse_list(f.values.at(k), k).at(0); };
  auto integer = [&](const std::string& k) {
    const double x = num(k);
    if (x != std::floor(x)) throw ConfigError("--" + k + " expects an integer");
    return static_cast<long long>(x);
  };
  auto has = [&](const std::string& k) { return f.values.count(k) > 0; };
  if (has("N")) j["N"] = integer("N");
  if (has("p")) j["p"] = num("p");
  if (has("lambda")) j["lambda"] = num("lambda"), j["R"] = nullptr;
  if (has("R")) j["R"] = num("R"), j["lambda"] = has("lambda") ? json(num("lambda")) : json(nullptr);
  if (has("group")) j["group"] = f.values.at("group");
  if (has("mode")) j["mode"] = integer("mode");
  json g = json::object();
  if (has("M")) g["M"] = integer("M");
  if (has("stretch")) g["stretch"] = num("stretch");
  if (has("r-max-factor")) g["r_max_factor"] = num("r-max-factor");
  if (has("closure")) g["closure"] = f.values.at("closure");
  if (!g.empty()) j["grid"] = g;
  if (has("lambda0-bracket")) j["lambda0_bracket"] = parse_list(f.values.at("lambda0-bracket"), "lambda0-bracket");
  if (has("lambda-star-bracket"))
    j["lambda_star_bracket"] = parse_list(f.values.at("lambda-star-bracket"), "lambda-star-bracket");
  if (has("tol")) j["relative_tol"] = num("tol");
  if (has("samples")) j["sigma_samples"] = integer("samples");
  if (has("span")) j["sigma_span"] = num("span");
  if (has("eigen-count")) j["eigen_count"] = integer("eigen-count");
  if (has("eps")) j["epsilons"] = parse_list(f.values.at("eps"), "eps");
  if (has("lambda-factors")) j["defect_lambda_factors"] = parse_list(f.values.at("lambda-factors"), "lambda-factors");
  if (has("K")) j["K"] = integer("K");
  if (has("cutoff")) j["cutoff"] = parse_list(f.values.at("cutoff"), "cutoff");
  if (has("epsilon")) j["shape_epsilon"] = num("epsilon");
  if (has("points")) j["shape_points"] = integer("points");
  if (has("radii")) j["radii"] = parse_list(f.values.at("radii"), "radii");
  if (has("hardy-count")) j["hardy_count"] = integer("hardy-count");
  if (has("trace-count")) j["trace_count"] = integer("trace-count");
  if (f.seed) j["seed"] = *f.seed;
  return j;
}

Context resolve(const Flags& f) {
  Context ctx;
  if (!f.config_path.empty()) ctx.cfg = load_config_file(f.config_path);
  apply_json(ctx.cfg, overlay(f));
  validate(ctx.cfg);
  if (!f.out.empty()) ctx.out = f.out;
  else if (const char* env = std::getenv("EBL_OUT_DIR"); env && *env) ctx.out = env;
  else ctx.out = ctx.cfg.out;
  if (f.jobs < 1) throw ConfigError("--jobs must be at least 1");
  ctx.jobs = f.jobs;
  ctx.use_cache = !f.no_cache;
  ctx.suite = f.suite;
  return ctx;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exterior ground states, symmetric Steklov bifurcation and perturbed-domain checks"};
  app.set_version_flag("--version", std::string(ebl::version));
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  app.add_option("--config", f.config_path, "JSON run configuration");
  app.add_option("--out", f.out, "output directory (default: $EBL_OUT_DIR, else config 'out')");
  app.add_option("--jobs", f.jobs, "parallel worker cap");
  app.add_option("--seed", f.seed, "seed for the randomized checks");
  app.add_flag("--no-cache", f.no_cache, "recompute even when cached outputs match");

  const std::vector<std::pair<std::string, std::string>> value_flags = {
      {"N", "dimension"},
      {"p", "exponent"},
      {"lambda", "lambda (exclusive with --R)"},
      {"R", "ball radius, lambda = R^-2"},
      {"group", "symmetry group, e.g. product-orthogonal(1), dihedral(3), tetrahedral"},
      {"mode", "single angular mode to report"},
      {"M", "grid cells"},
      {"stretch", "grid grading exponent"},
      {"r-max-factor", "outer radius is 1 + factor * max(1, sqrt(lambda))"},
      {"closure", "far-field closure: robin or dirichlet"},
      {"lambda0-bracket", "lo,hi for Lambda0"},
      {"lambda-star-bracket", "lo,hi for Lambda*"},
      {"tol", "bisection width relative to the bracket top"},
      {"samples", "sigma curve samples"},
      {"span", "sigma curve extends to span * Lambda*"},
      {"eigen-count", "eigenvalues / modes reported"},
      {"eps", "epsilon ladder, comma separated and decreasing"},
      {"lambda-factors", "defect lambdas as multiples of Lambda*"},
      {"K", "angular cosine modes in the perturbed solve"},
      {"cutoff", "t_in,t_out of the mapping cutoff"},
      {"epsilon", "shape amplitude"},
      {"points", "shape boundary points"},
      {"radii", "radii for the limit check, decreasing"},
      {"hardy-count", "random Hardy cases"},
      {"trace-count", "random trace cases"},
  };
  std::map<std::string, std::string> raw;
  for (const auto& [name, help] : value_flags) app.add_option("--" + name, raw[name], help);

  std::map<std::string, int (*)(const Context&)> commands = {
      {"radial", cmd_radial},       {"ground-state", cmd_ground_state}, {"spectrum", cmd_spectrum},
      {"steklov", cmd_steklov},     {"bifurcate", cmd_bifurcate},       {"defect", cmd_defect},
      {"shape", cmd_shape},         {"check", cmd_check},               {"limit", cmd_limit}};
  const std::map<std::string, std::string> blurbs = {
      {"radial", "exterior ground state u.csv, u.meta.json"},
      {"ground-state", "whole-space ground state U.csv, U.meta.json"},
      {"spectrum", "mode-wise linearized spectrum"},
      {"steklov", "Steklov mode data gamma_k, sigma_k"},
      {"bifurcate", "Lambda0, Lambda*, R*, sigma curve and shape"},
      {"defect", "perturbed-domain defect and linearization order"},
      {"shape", "first-order bifurcating domain"},
      {"check", "verification suites"},
      {"limit", "R -> 0 limits"}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, fn] : commands) subs[name] = app.add_subcommand(name, blurbs.at(name));
  std::optional<std::string> suite;
  subs["check"]->add_option("--suite", suite, "inequalities | identities | limits | defect | all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  std::string command;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) command = name;
  for (const auto& [name, help] : value_flags)
    if (app.count("--" + name) > 0) f.values[name] = raw[name];

  if (command == "check") {
    if (!suite || suite->empty()) {
      std::cerr << "check: --suite is required (inequalities, identities, limits, defect, all)\n";
      return exit_usage;
    }
    const auto& names = ebl::suite_names();
    if (std::find(names.begin(), names.end(), *suite) == names.end()) {
      std::cerr << "check: unknown suite '" << *suite << "'\n";
      return exit_usage;
    }
    f.suite = *suite;
  }

  try {
    const Context ctx = resolve(f);
    return commands.at(command)(ctx);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const ebl::InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return exit_config;
  } catch (const ebl::NoBracket& e) {
    std::cerr << "bracket failure: " << e.what() << "\n";
    return exit_bracket;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return exit_solver;
  }
}
