#include "rsdmc/samplers.hpp"

#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "rsdmc/ou_kernel.hpp"

namespace rsdmc {

namespace {

/// Parallel map over particle indices with per-particle RNG substreams and
/// sharded counters. Work is split by index, so results do not depend on the
/// worker count.
template <typename PerParticle>
std::uint64_t parallel_particles(int n, int workers, PerParticle&& body) {
  if (n <= 0) return 0;
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    GradientCounter shard;
    for (int i = 0; i < n; ++i) body(i, shard);
    return shard.total;
  }
  std::vector<GradientCounter> shards(workers);
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i, shards[w]);
    });
  }
  for (auto& t : pool) t.join();
  std::uint64_t total = 0;
  for (const auto& s : shards) total += s.total;
  return total;
}

void guard_particle(const Vec& x, int k, int r) {
  for (int c = 0; c < x.size(); ++c) {
    if (!std::isfinite(x[c]) || std::abs(x[c]) > kDivergenceGuard) throw DivergenceError(k, r, -1, -1);
  }
}

}  // namespace

Mat init_particles(int n, int dim, RngStream& rng) {
  if (n < 0) throw InputError("particle count must be nonnegative");
  Mat out(n, dim);
  for (int i = 0; i < n; ++i) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(i));
    for (int c = 0; c < dim; ++c) out(i, c) = sub.normal();
  }
  return out;
}

ParticleSet run_ula(const TargetDistribution& target, int n_particles, int steps, double h,
                    RngStream& rng, GradientCounter& counter, const RunOptions& options) {
  if (h <= 0.0) throw InputError("ULA step size must be positive");
  if (steps < 0) throw InputError("step count must be nonnegative");

  ParticleSet set;
  set.sampler_id = "ula";
  set.seed = rng.key();
  set.points.resize(n_particles, target.dim);
  const double noise_sd = std::sqrt(2.0 * h);
  const int workers = options.observer ? 1 : options.workers;

  const std::uint64_t consumed = parallel_particles(
      n_particles, workers, [&](int i, GradientCounter& shard) {
        RngStream stream = rng.substream(static_cast<std::uint64_t>(i));
        Vec x(target.dim);
        for (int c = 0; c < target.dim; ++c) x[c] = stream.normal();
        const std::uint64_t before = shard.total;
        if (options.observer) options.observer(i, 0, 0, x);
        for (int s = 0; s < steps; ++s) {
          x += h * target.grad_log_density(x, shard);
          for (int c = 0; c < target.dim; ++c) x[c] += noise_sd * stream.normal();
          guard_particle(x, -1, s);
          if (options.observer) options.observer(i, s + 1, shard.total - before, x);
        }
        set.points.row(i) = x.transpose();
      });

  counter.total += consumed;
  set.grad_per_particle =
      n_particles > 0 ? static_cast<double>(consumed) / n_particles : 0.0;
  ScheduleParams meta;
  meta.sampler = "ula";
  meta.K = 1;
  meta.R = steps;
  meta.eta = h;
  meta.S = steps * h;
  meta.budget = static_cast<std::uint64_t>(steps);
  set.meta_json = meta.to_json();
  return set;
}

ParticleSet run_rsdmc(const TargetDistribution& target, const ScheduleParams& params,
                      int n_particles, RngStream& rng, GradientCounter& counter,
                      const RunOptions& options) {
  if (params.R <= 0 || params.K <= 0) throw InputError("schedule has no iterations");
  if (params.eta <= 0.0) throw InputError("outer step must be positive");

  ParticleSet set;
  set.sampler_id = params.sampler;
  set.seed = rng.key();
  set.meta_json = params.to_json();
  set.points.resize(n_particles, target.dim);

  const int total_iters = params.K * params.R;
  const int tail_start = total_iters - params.ula_tail;
  const double tail_noise = params.ula_tail > 0 ? std::sqrt(2.0 * params.ula_tail_step) : 0.0;
  const double outer_noise = std::sqrt(std::expm1(2.0 * params.eta));
  const double growth = std::exp(params.eta);
  const double coeff =
      (params.variant == DriftVariant::kFactor2 ? 2.0 : 1.0) * (growth - 1.0);
  const int workers = options.observer ? 1 : options.workers;

  const std::uint64_t consumed = parallel_particles(
      n_particles, workers, [&](int i, GradientCounter& shard) {
        RngStream stream = rng.substream(static_cast<std::uint64_t>(i));
        Vec x(target.dim);
        for (int c = 0; c < target.dim; ++c) x[c] = stream.normal();
        const std::uint64_t before = shard.total;
        if (options.observer) options.observer(i, 0, 0, x);

        int global = 0;
        for (int k = params.K - 1; k >= 0; --k) {
          for (int r = 0; r < params.R; ++r, ++global) {
            if (global >= tail_start) {
              // final iterations: plain Langevin update with the target score
              Vec v = options.score_override ? options.score_override(k, r, x)
                                             : deep_score_v2(x, target, shard);
              x += params.ula_tail_step * v;
              for (int c = 0; c < target.dim; ++c) x[c] += tail_noise * stream.normal();
            } else {
              Vec v;
              if (options.score_override) {
                v = options.score_override(k, r, x);
              } else {
                v = estimate_score(k, r, x, params, target, stream, shard).value;
              }
              x = growth * x + coeff * v;
              for (int c = 0; c < target.dim; ++c) x[c] += outer_noise * stream.normal();
            }
            guard_particle(x, k, r);
            if (options.observer) options.observer(i, global + 1, shard.total - before, x);
          }
        }
        set.points.row(i) = x.transpose();
      });

  counter.total += consumed;
  set.grad_per_particle =
      n_particles > 0 ? static_cast<double>(consumed) / n_particles : 0.0;
  return set;
}

ParticleSet run_dmc(const TargetDistribution& target, const SamplerConfig& config, int n_particles,
                    RngStream& rng, GradientCounter& counter, const RunOptions& options) {
  SamplerConfig dmc = config;
  dmc.sampler = "dmc";
  dmc.K = 1;
  ScheduleParams params = practical_schedule(dmc);
  return run_rsdmc(target, params, n_particles, rng, counter, options);
}

}  // namespace rsdmc
