#pragma once

#include <stdexcept>
#include <string>

namespace psrl {

/// Observation is impossible under the current belief and kernel(s).
class ZeroLikelihood : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Relative value iteration hit its iteration cap.
class NoConvergence : public std::runtime_error {
 public:
  NoConvergence(long iterations, double residual)
      : std::runtime_error("relative value iteration did not converge after " +
                           std::to_string(iterations) + " sweeps (residual " +
                           std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}

  long iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  long iterations_;
  double residual_;
};

class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class MissingArtifacts : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidHistory : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateFit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed model / parameter-set / experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace psrl
