#pragma once

#include <stdexcept>
#include <string>

namespace brox {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Multiplier or coefficient vector breaks ĉ_{-k} = conj(ĉ_k).
class SymmetryError : public Error {
 public:
  using Error::Error;
};

// Grid sizes incompatible with the requested operation (dealiasing, mismatch).
class GridError : public Error {
 public:
  using Error::Error;
};

// Truncation level outside the sampled range.
class LevelError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

// Γ fixed-point iteration failed to contract at the requested reference level.
class ThresholdError : public Error {
 public:
  using Error::Error;
};

// Iterative solver stagnated or an eigensolver failed.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// e^{2W} is not resolved by the quadrature grid.
class WeightTailError : public Error {
 public:
  using Error::Error;
};

// Euler–Maruyama step violates the stability rule.
class StabilityError : public Error {
 public:
  using Error::Error;
};

// Statistical routine has too few samples or a degenerate variance.
class SampleError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace brox
