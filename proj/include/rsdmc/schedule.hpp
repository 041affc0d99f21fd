#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rsdmc/common.hpp"
#include "rsdmc/ou_kernel.hpp"

namespace rsdmc {

/// How the recursive estimator obtains the segment-base score.
enum class ScoreBase {
  kRecursive,  // descend one segment per level, base case at k = -1
  kDirect,     // use -grad f* at every level (the late-time approximation)
};

inline ScoreBase score_base_from_string(const std::string& name) {
  if (name == "recursive") return ScoreBase::kRecursive;
  if (name == "direct") return ScoreBase::kDirect;
  throw ConfigError("unknown score base '" + name + "' (expected recursive|direct)");
}

inline const char* to_string(ScoreBase b) {
  return b == ScoreBase::kRecursive ? "recursive" : "direct";
}

/// Full hyperparameter block for one sampler run.
struct ScheduleParams {
  std::string sampler = "rsdmc-v1";

  double S = 0.0;   // segment length
  int K = 1;        // segment count
  double eta = 0.0; // outer step
  int R = 0;        // reverse iterations per segment

  /// Inner ULA step as a function of the gap t'.
  std::function<double(double)> tau_rule;
  double tau_const = 0.0;  // the constant value when the rule is flat, else NaN

  /// Mean-estimation chain count and inner iteration count. The theoretical
  /// schedule stores the formula values evaluated at the recursion tolerance
  /// l_rec; m additionally scales with max(log ||x||^2, 1).
  double n_chains = 1.0;
  std::function<double(double)> m_steps;  // ||x|| -> iteration count
  double m_const = 1.0;

  double l = 0.0;      // top-level score tolerance
  double l_rec = 0.0;  // recursion tolerance
  double log_delta = 0.0;
  bool delta_clamped = false;
  double clamp_ceiling = 1e6;

  DriftVariant variant = DriftVariant::kPaper;
  ScoreBase score_base = ScoreBase::kRecursive;
  int ula_tail = 0;
  double ula_tail_step = 0.0;

  std::uint64_t budget = 0;  // gradient budget per particle (0 = unset)

  int n_chains_int() const;
  int m_steps_int(double x_norm) const;
  std::string to_json() const;  // scalar snapshot for run metadata
};

/// One failed schedule inequality, with how badly it failed.
struct ScheduleViolation {
  std::string name;
  double margin = 0.0;  // positive = amount past the bound
  std::string detail;
};

struct TheoreticalOptions {
  double particle_norm_bound = 1.0;  // the Z entering C_{u,1}; log Z <= 1/2 by default
  double clamp_ceiling = 1e6;        // cap on max{d, -2 log delta} inside n
};

/// Schedule from the convergence theorem: S, K, eta, R, tolerances, delta,
/// chain counts and the gap-dependent inner step rule.
ScheduleParams theoretical_schedule(double L, double M, int d, double eps,
                                    const TheoreticalOptions& opts = {});

/// Named sampler configuration (JSON fields: sampler, K, R, eta, tau, n, m,
/// ula_tail, variant, budget, particles, seed; omitted fields take defaults).
struct SamplerConfig {
  std::string sampler = "rsdmc-v1";  // ula | dmc | rsdmc-v1 | rsdmc-v2
  std::uint64_t budget = 200;
  int particles = 1000;
  std::uint64_t seed = 1;

  // overridable knobs; negative/zero means "use the default for the sampler"
  int K = 0;
  int R = 0;
  double eta = 0.0;
  double tau = 0.0;
  double n = 0.0;
  double m = 0.0;
  int ula_tail = -1;
  double ula_tail_step = 0.0;
  double ula_step = 0.0;  // baseline ULA step size
  std::string variant;
  std::string score_base;

  static SamplerConfig from_json(const std::string& text);
  std::string to_json() const;
};

/// Experiment defaults for the four named samplers, budget-scaled.
ScheduleParams practical_schedule(const SamplerConfig& config);

/// Check every schedule inequality; returns all failures (possibly none).
/// Practical schedules are allowed to violate the theoretical bounds; the
/// violations are reported, never thrown.
std::vector<ScheduleViolation> validate(const ScheduleParams& params, double L);

}  // namespace rsdmc
