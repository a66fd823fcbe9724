#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ebl/ebl.hpp"
#include "json.hpp"

namespace ebl::cli {

using json = nlohmann::ordered_json;

/// Raised for malformed or inconsistent configuration (exit code 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  int N = 2;
  double p = 3.0;
  std::optional<double> lambda;
  std::optional<double> R;
  std::string group = "product-orthogonal(1)";
  std::optional<int> mode;
  GridPolicy grid{};
  std::optional<std::pair<double, double>> lambda0_bracket;
  std::optional<std::pair<double, double>> lambda_star_bracket;
  double relative_tol = 1e-10;
  int sigma_samples = 24;
  double sigma_span = 1.5;
  int eigen_count = 4;
  std::vector<double> epsilons{1e-2, 5e-3, 2.5e-3};
  std::vector<double> defect_lambda_factors{1.2, 1.0};
  int K = 8;
  double cutoff_in = 1.25;
  double cutoff_out = 1.5;
  double shape_epsilon = 0.05;
  int shape_points = 0;
  std::vector<double> radii{1.0, 0.5, 0.25, 0.125};
  int hardy_count = 1000;
  int trace_count = 200;
  std::uint64_t seed = 20240611;
  std::string out = "out";

  /// lambda from lambda or R (lambda = R^-2); error when both or neither.
  double resolved_lambda() const {
    if (lambda && R) throw ConfigError("give either lambda or R, not both");
    if (lambda) return *lambda;
    if (R) return 1.0 / (*R * *R);
    throw ConfigError("lambda (or R) is required for this command");
  }
  bool has_lambda() const { return lambda.has_value() || R.has_value(); }
  GroupSpec group_spec() const {
    try {
      return GroupSpec::parse(group, N);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("invalid group: ") + e.what());
    }
  }
};

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "N",           "p",           "lambda",        "R",         "group",         "mode",
      "grid",        "lambda0_bracket", "lambda_star_bracket", "relative_tol", "sigma_samples", "sigma_span",
      "eigen_count", "epsilons",    "defect_lambda_factors", "K",  "cutoff",        "shape_epsilon",
      "shape_points", "radii",      "hardy_count",   "trace_count", "seed",         "out"};
  return keys;
}

inline const std::vector<std::string>& grid_keys() {
  static const std::vector<std::string> keys = {"M", "stretch", "r_max_factor", "closure"};
  return keys;
}

namespace detail {

inline void reject_unknown(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

inline double number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError("'" + key + "' must be finite");
  return x;
}

inline int integer(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
  return v.get<int>();
}

inline std::vector<double> number_list(const json& v, const std::string& key) {
  if (!v.is_array() || v.empty()) throw ConfigError("'" + key + "' must be a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(number(x, key));
  return out;
}

inline std::optional<std::pair<double, double>> bracket(const json& v, const std::string& key) {
  if (v.is_null()) return std::nullopt;
  const auto b = number_list(v, key);
  if (b.size() != 2 || !(0.0 < b[0] && b[0] < b[1])) throw ConfigError("'" + key + "' must be [lo, hi] with 0 < lo < hi");
  return std::make_pair(b[0], b[1]);
}

}  // namespace detail

/// Overlays the keys present in j onto cfg.
inline void apply_json(RunConfig& cfg, const json& j) {
  using namespace detail;
  reject_unknown(j, config_keys(), "config");
  if (j.contains("N")) cfg.N = integer(j["N"], "N");
  if (j.contains("p")) cfg.p = number(j["p"], "p");
  if (j.contains("lambda")) cfg.lambda = j["lambda"].is_null() ? std::nullopt : std::optional(number(j["lambda"], "lambda"));
  if (j.contains("R")) cfg.R = j["R"].is_null() ? std::nullopt : std::optional(number(j["R"], "R"));
  if (j.contains("group")) {
    if (!j["group"].is_string()) throw ConfigError("'group' must be a string");
    cfg.group = j["group"].get<std::string>();
  }
  if (j.contains("mode")) cfg.mode = j["mode"].is_null() ? std::nullopt : std::optional(integer(j["mode"], "mode"));
  if (j.contains("grid")) {
    const json& g = j["grid"];
    reject_unknown(g, grid_keys(), "grid");
    if (g.contains("M")) cfg.grid.M = integer(g["M"], "grid.M");
    if (g.contains("stretch")) cfg.grid.stretch = number(g["stretch"], "grid.stretch");
    if (g.contains("r_max_factor")) cfg.grid.r_max_factor = number(g["r_max_factor"], "grid.r_max_factor");
    if (g.contains("closure")) {
      if (!g["closure"].is_string()) throw ConfigError("'grid.closure' must be a string");
      try {
        cfg.grid.closure = closure_from_string(g["closure"].get<std::string>());
      } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
      }
    }
  }
  if (j.contains("lambda0_bracket")) cfg.lambda0_bracket = bracket(j["lambda0_bracket"], "lambda0_bracket");
  if (j.contains("lambda_star_bracket"))
    cfg.lambda_star_bracket = bracket(j["lambda_star_bracket"], "lambda_star_bracket");
  if (j.contains("relative_tol")) cfg.relative_tol = number(j["relative_tol"], "relative_tol");
  if (j.contains("sigma_samples")) cfg.sigma_samples = integer(j["sigma_samples"], "sigma_samples");
  if (j.contains("sigma_span")) cfg.sigma_span = number(j["sigma_span"], "sigma_span");
  if (j.contains("eigen_count")) cfg.eigen_count = integer(j["eigen_count"], "eigen_count");
  if (j.contains("epsilons")) cfg.epsilons = number_list(j["epsilons"], "epsilons");
  if (j.contains("defect_lambda_factors"))
    cfg.defect_lambda_factors = number_list(j["defect_lambda_factors"], "defect_lambda_factors");
  if (j.contains("K")) cfg.K = integer(j["K"], "K");
  if (j.contains("cutoff")) {
    const auto c = number_list(j["cutoff"], "cutoff");
    if (c.size() != 2) throw ConfigError("'cutoff' must be [t_in, t_out]");
    cfg.cutoff_in = c[0];
    cfg.cutoff_out = c[1];
  }
  if (j.contains("shape_epsilon")) cfg.shape_epsilon = number(j["shape_epsilon"], "shape_epsilon");
  if (j.contains("shape_points")) cfg.shape_points = integer(j["shape_points"], "shape_points");
  if (j.contains("radii")) cfg.radii = number_list(j["radii"], "radii");
  if (j.contains("hardy_count")) cfg.hardy_count = integer(j["hardy_count"], "hardy_count");
  if (j.contains("trace_count")) cfg.trace_count = integer(j["trace_count"], "trace_count");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
      throw ConfigError("'seed' must be a non-negative integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("out")) {
    if (!j["out"].is_string()) throw ConfigError("'out' must be a string");
    cfg.out = j["out"].get<std::string>();
  }
}

inline RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  RunConfig cfg;
  apply_json(cfg, j);
  return cfg;
}

/// Value checks shared by every command (after all overlays).
inline void validate(const RunConfig& cfg) {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (cfg.N < 2) fail("N must be at least 2");
  if (!(cfg.p > 1.0)) fail("p must exceed 1");
  if (cfg.N >= 3 && !(cfg.p < ProblemParams::critical_exponent(cfg.N))) fail("p must be subcritical for N >= 3");
  if (cfg.lambda && !(*cfg.lambda > 0.0)) fail("lambda must be positive");
  if (cfg.R && !(*cfg.R > 0.0)) fail("R must be positive");
  if (cfg.lambda && cfg.R) fail("give either lambda or R, not both");
  cfg.group_spec();
  if (cfg.grid.M < 16) fail("grid.M must be at least 16");
  if (!(cfg.grid.stretch >= 1.0)) fail("grid.stretch must be at least 1");
  if (!(cfg.grid.r_max_factor > 0.0)) fail("grid.r_max_factor must be positive");
  if (!(cfg.relative_tol > 0.0 && cfg.relative_tol < 1e-2)) fail("relative_tol must lie in (0, 1e-2)");
  if (cfg.sigma_samples < 0) fail("sigma_samples must be non-negative");
  if (!(cfg.sigma_span > 1.0)) fail("sigma_span must exceed 1");
  if (cfg.eigen_count < 1) fail("eigen_count must be positive");
  for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
    if (!(cfg.epsilons[i] > 0.0)) fail("epsilons must be positive");
    if (i > 0 && !(cfg.epsilons[i] < cfg.epsilons[i - 1])) fail("epsilons must decrease");
  }
  for (double f : cfg.defect_lambda_factors)
    if (!(f >= 1.0)) fail("defect_lambda_factors must be >= 1 (relative to Lambda*)");
  if (cfg.K < 1) fail("K must be positive");
  if (!(1.0 < cfg.cutoff_in && cfg.cutoff_in < cfg.cutoff_out)) fail("cutoff must satisfy 1 < t_in < t_out");
  if (!(cfg.shape_epsilon >= 0.0)) fail("shape_epsilon must be non-negative");
  if (cfg.shape_points < 0) fail("shape_points must be non-negative");
  for (std::size_t i = 0; i < cfg.radii.size(); ++i) {
    if (!(cfg.radii[i] > 0.0 && cfg.radii[i] <= 1.0)) fail("radii must lie in (0, 1]");
    if (i > 0 && !(cfg.radii[i] < cfg.radii[i - 1])) fail("radii must decrease");
  }
  if (cfg.hardy_count < 0 || cfg.trace_count < 0) fail("check counts must be non-negative");
  if (cfg.out.empty()) fail("out must not be empty");
}

/// Fully resolved configuration as embedded in every output. The output
/// directory is left out so relocated runs stay byte-identical.
inline json to_json(const RunConfig& cfg) {
  json j;
  j["N"] = cfg.N;
  j["p"] = cfg.p;
  if (cfg.has_lambda()) {
    const double lam = cfg.resolved_lambda();
    j["lambda"] = lam;
    j["R"] = 1.0 / std::sqrt(lam);
  } else {
    j["lambda"] = nullptr;
    j["R"] = nullptr;
  }
  j["group"] = cfg.group;
  j["mode"] = cfg.mode ? json(*cfg.mode) : json(nullptr);
  j["grid"] = {{"M", cfg.grid.M},
               {"stretch", cfg.grid.stretch},
               {"r_max_factor", cfg.grid.r_max_factor},
               {"closure", to_string(cfg.grid.closure)}};
  auto br = [](const std::optional<std::pair<double, double>>& b) {
    return b ? json::array({b->first, b->second}) : json(nullptr);
  };
  j["lambda0_bracket"] = br(cfg.lambda0_bracket);
  j["lambda_star_bracket"] = br(cfg.lambda_star_bracket);
  j["relative_tol"] = cfg.relative_tol;
  j["sigma_samples"] = cfg.sigma_samples;
  j["sigma_span"] = cfg.sigma_span;
  j["eigen_count"] = cfg.eigen_count;
  j["epsilons"] = cfg.epsilons;
  j["defect_lambda_factors"] = cfg.defect_lambda_factors;
  j["K"] = cfg.K;
  j["cutoff"] = json::array({cfg.cutoff_in, cfg.cutoff_out});
  j["shape_epsilon"] = cfg.shape_epsilon;
  j["shape_points"] = cfg.shape_points;
  j["radii"] = cfg.radii;
  j["hardy_count"] = cfg.hardy_count;
  j["trace_count"] = cfg.trace_count;
  j["seed"] = cfg.seed;
  return j;
}

}  // namespace ebl::cli
