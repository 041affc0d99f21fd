#pragma once

#include <functional>
#include <optional>
#include <string>

#include "rsdmc/common.hpp"
#include "rsdmc/rng.hpp"

namespace rsdmc {

/// Isotropic Gaussian mixture: weights w_i, means mu_i, per-mode variances
/// sigma_i^2 (covariance sigma_i^2 * I).
struct GaussianMixture {
  Vec weights;
  Mat means;  // one mode per row
  Vec variances;

  int dim() const { return static_cast<int>(means.cols()); }
  int modes() const { return static_cast<int>(means.rows()); }

  /// weights sum to 1, variances strictly positive, shapes agree.
  void check() const;

  std::string to_json() const;
  static GaussianMixture from_json(const std::string& text);
};

/// Unnormalized target exp(-f*) seen through its log-density and gradient
/// oracle. grad_log_density is the counted oracle; log_density is free.
struct TargetDistribution {
  int dim = 0;
  double smoothness_L = 1.0;    // Lipschitz bound on the score
  double second_moment_M = 0.0; // E ||x||^2 under the target

  std::function<double(const Vec&)> log_density;
  std::function<Vec(const Vec&, GradientCounter&)> grad_log_density;
  /// Closed-form score of the time-t diffused law, when available.
  std::function<Vec(double, const Vec&)> analytic_diffused_score;
};

double gmm_log_density(const GaussianMixture& gmm, const Vec& x);

/// Score of the mixture via posterior responsibilities. Counts one gradient call.
Vec gmm_grad_log_density(const GaussianMixture& gmm, const Vec& x, GradientCounter& counter);

/// Law of the forward OU process at time t started from the mixture:
/// means shrink by e^{-t}, variances move toward 1.
GaussianMixture diffuse_gmm(const GaussianMixture& gmm, double t);

/// grad log p_t(x) where p_t = diffuse_gmm(gmm, t). Does not touch any counter.
Vec analytic_score(const GaussianMixture& gmm, double t, const Vec& x);

Mat sample_gmm(const GaussianMixture& gmm, int n, RngStream& rng);

/// Wrap a mixture as a TargetDistribution. M is computed exactly; L is a
/// conservative analytic bound (override if a sharper constant is known).
TargetDistribution make_gmm_target(const GaussianMixture& gmm,
                                   std::optional<double> smoothness_L = std::nullopt);

/// Standard Gaussian N(0, I_d): L = 1, M = d, score(x) = -x at every diffusion time.
TargetDistribution make_standard_gaussian_target(int dim);

}  // namespace rsdmc
