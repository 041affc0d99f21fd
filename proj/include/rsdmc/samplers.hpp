#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "rsdmc/common.hpp"
#include "rsdmc/rng.hpp"
#include "rsdmc/rse.hpp"
#include "rsdmc/schedule.hpp"
#include "rsdmc/target.hpp"

namespace rsdmc {

/// N particles in R^d plus run provenance.
struct ParticleSet {
  Mat points;  // N x d
  std::string sampler_id;
  std::uint64_t seed = 0;
  double grad_per_particle = 0.0;
  std::string meta_json;  // schedule snapshot

  int count() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
};

/// Called after each outer step of each particle; used for trajectory
/// snapshots. Arguments: particle index, outer step (1-based), cumulative
/// gradient calls for this particle, current state.
using StepObserver =
    std::function<void(int particle, int step, std::uint64_t grads, const Vec& state)>;

/// Test hook: replace the score estimate at (segment, reverse_iter, x).
using ScoreOverride = std::function<Vec(int segment, int reverse_iter, const Vec& x)>;

struct RunOptions {
  int workers = 1;
  StepObserver observer;       // forces single-threaded execution when set
  ScoreOverride score_override;
};

Mat init_particles(int n, int dim, RngStream& rng);

/// Unadjusted Langevin baseline: steps full-gradient updates per particle
/// from a standard Gaussian start.
ParticleSet run_ula(const TargetDistribution& target, int n_particles, int steps, double h,
                    RngStream& rng, GradientCounter& counter, const RunOptions& options = {});

/// Segmented reverse-diffusion sampler with recursive score estimation.
ParticleSet run_rsdmc(const TargetDistribution& target, const ScheduleParams& params,
                      int n_particles, RngStream& rng, GradientCounter& counter,
                      const RunOptions& options = {});

/// Single-segment special case: the whole horizon as one segment.
ParticleSet run_dmc(const TargetDistribution& target, const SamplerConfig& config, int n_particles,
                    RngStream& rng, GradientCounter& counter, const RunOptions& options = {});

}  // namespace rsdmc
