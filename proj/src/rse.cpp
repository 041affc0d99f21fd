#include "rsdmc/rse.hpp"

#include <cmath>

#include "rsdmc/ou_kernel.hpp"

namespace rsdmc {

namespace {

void guard_finite(const Vec& x, int k, int r, int chain, int inner) {
  for (int c = 0; c < x.size(); ++c) {
    const double v = x[c];
    if (!std::isfinite(v) || std::abs(v) > kDivergenceGuard)
      throw DivergenceError(k, r, chain, inner);
  }
}

}  // namespace

ScoreEstimate estimate_score(int k, int r, const Vec& x, const ScheduleParams& params,
                             const TargetDistribution& target, RngStream& rng,
                             GradientCounter& counter, CallTrace* trace) {
  if (k < -1) throw InputError("segment index below the base case");
  if (trace) trace->emplace_back(k, r);

  if (k == -1) {
    ScoreEstimate est;
    est.value = target.grad_log_density(x, counter);
    est.grad_calls = 1;
    est.max_particle_norm = x.norm();
    return est;
  }
  if (r < 0 || r >= params.R) throw InputError("reverse iteration outside [0, R)");

  const double t_gap = TimeIndex{k, r}.gap(params.S, params.eta);
  const double e1 = std::exp(-t_gap);
  const double e2 = std::exp(-2.0 * t_gap);
  const double tau = params.tau_rule ? params.tau_rule(t_gap) : params.tau_const;
  if (tau <= 0.0) throw InputError("inner step rule produced a nonpositive tau");
  const double inner_noise = std::sqrt(2.0 * tau);
  const int n = params.n_chains_int();

  ScoreEstimate est;
  est.value = Vec::Zero(x.size());
  est.max_particle_norm = x.norm();

  for (int i = 0; i < n; ++i) {
    Vec walker = q_init_sample(x, t_gap, rng);
    guard_finite(walker, k, r, i, -1);
    est.max_particle_norm = std::max(est.max_particle_norm, walker.norm());

    const int m = params.m_steps_int(walker.norm());
    for (int j = 0; j < m; ++j) {
      Vec base_score;
      if (params.score_base == ScoreBase::kDirect) {
        base_score = target.grad_log_density(walker, counter);
        est.grad_calls += 1;
      } else {
        ScoreEstimate inner = estimate_score(k - 1, 0, walker, params, target, rng, counter, trace);
        base_score = std::move(inner.value);
        est.grad_calls += inner.grad_calls;
        est.max_particle_norm = std::max(est.max_particle_norm, inner.max_particle_norm);
      }
      walker += tau * (base_score + q_score_tilt(x, walker, t_gap));
      for (int c = 0; c < walker.size(); ++c) walker[c] += inner_noise * rng.normal();
      guard_finite(walker, k, r, i, j);
      est.max_particle_norm = std::max(est.max_particle_norm, walker.norm());
    }
    est.value += (-(x - e1 * walker) / (1.0 - e2)) / static_cast<double>(n);
  }
  return est;
}

Vec deep_score_v2(const Vec& x, const TargetDistribution& target, GradientCounter& counter) {
  return target.grad_log_density(x, counter);
}

}  // namespace rsdmc
