#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace rsdmc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Bad argument to a library operation (dimension mismatch, nonpositive time, ...).
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed configuration file or unknown sampler name.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A hyperparameter fell outside the range where the schedule's guarantees hold.
class ScheduleViolationError : public std::runtime_error {
 public:
  explicit ScheduleViolationError(const std::string& what) : std::runtime_error(what) {}
};

/// A particle left the numerically sane region during a run. Carries the
/// (segment, reverse iteration, chain, inner step) location of the blow-up.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int segment, int reverse_iter, int chain, int inner_step)
      : std::runtime_error("particle diverged at (k=" + std::to_string(segment) +
                           ", r=" + std::to_string(reverse_iter) + ", i=" + std::to_string(chain) +
                           ", j=" + std::to_string(inner_step) + ")"),
        segment(segment),
        reverse_iter(reverse_iter),
        chain(chain),
        inner_step(inner_step) {}

  int segment;
  int reverse_iter;
  int chain;
  int inner_step;
};

inline constexpr double kDivergenceGuard = 1e6;

}  // namespace rsdmc
