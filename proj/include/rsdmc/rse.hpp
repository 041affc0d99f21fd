#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rsdmc/common.hpp"
#include "rsdmc/rng.hpp"
#include "rsdmc/schedule.hpp"
#include "rsdmc/target.hpp"

namespace rsdmc {

/// Output of one recursive score estimate.
struct ScoreEstimate {
  Vec value;
  std::uint64_t grad_calls = 0;     // gradient-oracle calls consumed by this estimate
  double max_particle_norm = 0.0;   // largest ||x'|| seen anywhere in the call tree
};

/// Optional instrumentation: (segment, reverse_iter) of every recursion entry.
using CallTrace = std::vector<std::pair<int, int>>;

/// Estimate grad log p_{k, S - r*eta}(x) by running n inner chains of m ULA
/// steps against the auxiliary posterior, recursing one segment down for the
/// base score. k = -1 returns the target score itself (one counted call).
ScoreEstimate estimate_score(int k, int r, const Vec& x, const ScheduleParams& params,
                             const TargetDistribution& target, RngStream& rng,
                             GradientCounter& counter, CallTrace* trace = nullptr);

/// Late-time shortcut: the diffused score collapses onto -grad f*, so return
/// it directly with one counted gradient call.
Vec deep_score_v2(const Vec& x, const TargetDistribution& target, GradientCounter& counter);

}  // namespace rsdmc
