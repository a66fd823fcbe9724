#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace ebl {

/// Base of every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Newton (or another iteration) did not reach its tolerance.
class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

/// Newton collapsed onto the zero solution.
class TrivialSolution : public ConvergenceFailure {
 public:
  using ConvergenceFailure::ConvergenceFailure;
};

/// A linear solve was requested at (or numerically at) a degeneracy.
class NearSingularOperator : public Error {
 public:
  using Error::Error;
};

class BisectionBracketFailure : public Error {
 public:
  using Error::Error;
};

/// The monitored quantity has the same sign at both ends of the bracket.
class NoBracket : public Error {
 public:
  using Error::Error;
};

/// The lower end of a Lambda* bracket sits on (or below) Lambda0.
class Lambda0Collision : public NoBracket {
 public:
  using NoBracket::NoBracket;
};

/// The boundary perturbation folds the mapped annulus.
class InadmissibleMapping : public Error {
 public:
  using Error::Error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

/// Short scientific rendering for messages.
inline std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

}  // namespace ebl
