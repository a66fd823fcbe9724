#pragma once

#include <cmath>
#include <limits>
#include <sstream>

#include "ebl/errors.hpp"

namespace ebl {

/// Physical configuration of the exterior problem on the complement of B_R,
/// rescaled to the unit hole with diffusion lambda = R^-2.
struct ProblemParams {
  int N = 2;
  double p = 3.0;
  double lambda = 1.0;
  double R = 1.0;

  static ProblemParams from_lambda(int N, double p, double lambda) {
    require(std::isfinite(lambda) && lambda > 0.0, "lambda must be positive and finite");
    ProblemParams params{N, p, lambda, 1.0 / std::sqrt(lambda)};
    params.validate();
    return params;
  }

  static ProblemParams from_radius(int N, double p, double R) {
    require(std::isfinite(R) && R > 0.0, "R must be positive and finite");
    ProblemParams params{N, p, 1.0 / (R * R), R};
    params.validate();
    return params;
  }

  /// Upper end of the admissible exponent range (infinite for N = 2).
  static double critical_exponent(int N) {
    if (N <= 2) return std::numeric_limits<double>::infinity();
    return (N + 2.0) / (N - 2.0);
  }

  void validate() const {
    require(N >= 2, "dimension N must be at least 2");
    require(std::isfinite(p) && p > 1.0, "exponent p must exceed 1");
    if (N >= 3) {
      std::ostringstream msg;
      msg << "exponent p must be below (N+2)/(N-2) = " << critical_exponent(N);
      require(p < critical_exponent(N), msg.str());
    }
    require(std::isfinite(lambda) && lambda > 0.0, "lambda must be positive and finite");
    require(std::isfinite(R) && R > 0.0, "R must be positive and finite");
    require(std::abs(lambda * R * R - 1.0) <= 8.0 * std::numeric_limits<double>::epsilon(),
            "lambda and R are inconsistent (lambda must equal R^-2)");
  }
};

}  // namespace ebl
