#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "oracle_helpers.hpp"
#include "rsdmc/ou_kernel.hpp"
#include "rsdmc/target.hpp"

using namespace rsdmc;

TEST_CASE("forward kernel parameters") {
  SUBCASE("identity limit at tiny times") {
    const auto [shrink, variance] = forward_kernel_params(1e-12);
    CHECK(shrink == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(variance == doctest::Approx(0.0).epsilon(1e-11));
    CHECK(variance > 0.0);
  }
  SUBCASE("t = ln 2") {
    const auto [shrink, variance] = forward_kernel_params(std::log(2.0));
    CHECK(shrink == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(variance == doctest::Approx(0.75).epsilon(1e-14));
  }
  SUBCASE("stationary limit") {
    const auto [shrink, variance] = forward_kernel_params(20.0);
    CHECK(shrink < 1e-8);
    CHECK(std::abs(variance - 1.0) < 1e-8);
  }
  SUBCASE("nonpositive time rejected") {
    CHECK_THROWS_AS(forward_kernel_params(0.0), InputError);
    CHECK_THROWS_AS(forward_kernel_params(-1.0), InputError);
  }
}

TEST_CASE("forward kernel matches the single-component diffusion law") {
  GaussianMixture g;
  g.weights = Vec::Ones(1);
  g.means = Mat::Constant(1, 2, 1.7);
  g.variances = Vec::Constant(1, 1.0);  // point-free check: delta start == variance fill
  for (double t : {0.05, 0.4, 2.0}) {
    const auto [shrink, variance] = forward_kernel_params(t);
    const GaussianMixture d = diffuse_gmm(g, t);
    CHECK(d.means(0, 0) == doctest::Approx(1.7 * shrink).epsilon(1e-14));
    // unit start variance: e^{-2t} * 1 + (1 - e^{-2t}) = shrink^2 + variance
    CHECK(d.variances[0] == doctest::Approx(shrink * shrink + variance).epsilon(1e-14));
  }
}

TEST_CASE("reverse step with zero score and zero noise is a pure expansion") {
  RngStream zeros = RngStream::zeros();
  Vec x(2);
  x << 0.4, -1.1;
  const Vec out = reverse_exp_step(x, Vec::Zero(2), 0.3, zeros);
  CHECK((out - std::exp(0.3) * x).norm() < 1e-15);
}

TEST_CASE("factor2 variant fixes the frozen drift at v = -x") {
  RngStream zeros = RngStream::zeros();
  Vec x(3);
  x << 1.0, -2.0, 0.5;
  const Vec out = reverse_exp_step(x, Vec(-x), 0.25, zeros, DriftVariant::kFactor2);
  // e^eta x - 2(e^eta - 1) x = (2 - e^eta) x; the drift x + 2v vanishes only
  // in the continuous limit, the one-step map still contracts toward x.
  CHECK((out - (2.0 - std::exp(0.25)) * x).norm() < 1e-14);
}

TEST_CASE("factor2 one-step variance on the stationary Gaussian") {
  // x ~ N(0,1), exact score v = -x: out = (2 - e^eta) x + xi. The closed-form
  // one-step variance is (2 - e^eta)^2 + e^{2 eta} - 1.
  const double eta = 0.05;
  const double expected = 1.0052574506471991;
  RngStream rng(777);
  double acc = 0.0, acc2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    Vec x(1);
    x << rng.normal();
    const Vec out = reverse_exp_step(x, Vec(-x), eta, rng, DriftVariant::kFactor2);
    acc += out[0];
    acc2 += out[0] * out[0];
  }
  const double var = acc2 / n - (acc / n) * (acc / n);
  CHECK(std::abs(var - expected) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("reverse step input validation") {
  RngStream rng(1);
  CHECK_THROWS_AS(reverse_exp_step(Vec::Zero(2), Vec::Zero(2), 0.0, rng), InputError);
  CHECK_THROWS_AS(reverse_exp_step(Vec::Zero(2), Vec::Zero(3), 0.1, rng), InputError);
}

TEST_CASE("score tilt arithmetic") {
  SUBCASE("zero anchor gives zero tilt at x0 = 0") {
    CHECK(q_score_tilt(Vec::Zero(2), Vec::Zero(2), 0.7).norm() == 0.0);
  }
  SUBCASE("worked 1-d example at t' = ln 2") {
    Vec anchor(1), x0(1);
    anchor << 1.0;
    x0 << 0.0;
    CHECK(q_score_tilt(anchor, x0, std::log(2.0))[0] ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  }
  SUBCASE("tilt is the gradient of the quadratic coupling term") {
    RngStream rng(55);
    const Vec anchor = rng.normal_vec(3);
    const Vec x0 = rng.normal_vec(3);
    const double t = 0.37;
    const double e1 = std::exp(-t), e2 = std::exp(-2.0 * t);
    const auto coupling = [&](const Vec& p) {
      return -(anchor - e1 * p).squaredNorm() / (2.0 * (1.0 - e2));
    };
    const Vec want = oracle::fd_gradient(coupling, x0, 1e-6);
    CHECK((q_score_tilt(anchor, x0, t) - want).norm() < 1e-6);
  }
  SUBCASE("nonpositive gap rejected") {
    CHECK_THROWS_AS(q_score_tilt(Vec::Zero(1), Vec::Zero(1), 0.0), InputError);
  }
}

TEST_CASE("inner-chain initializer moments") {
  SUBCASE("zero noise returns the scaled anchor") {
    RngStream zeros = RngStream::zeros();
    Vec anchor(2);
    anchor << 0.3, -0.6;
    CHECK((q_init_sample(anchor, 0.9, zeros) - std::exp(0.9) * anchor).norm() < 1e-15);
  }
  SUBCASE("variance at t' = ln 2 is 3") {
    RngStream rng(9001);
    Vec anchor = Vec::Zero(1);
    double acc2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const Vec draw = q_init_sample(anchor, std::log(2.0), rng);
      acc2 += draw[0] * draw[0];
    }
    CHECK(acc2 / n == doctest::Approx(3.0).epsilon(0.02));
  }
  SUBCASE("sample mean and variance at t' = 0.2 within three standard errors") {
    RngStream rng(3111);
    Vec anchor(1);
    anchor << 1.4;
    const double t = 0.2;
    const int n = 100000;
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double v = q_init_sample(anchor, t, rng)[0];
      acc += v;
      acc2 += v * v;
    }
    const double mean = acc / n;
    const double var = acc2 / n - mean * mean;
    const double want_mean = std::exp(t) * 1.4;
    const double want_var = std::exp(2.0 * t) - 1.0;
    CHECK(std::abs(mean - want_mean) <= 3.0 * std::sqrt(want_var / n));
    CHECK(std::abs(var - want_var) <= 3.0 * want_var * std::sqrt(2.0 / n));
  }
}

TEST_CASE("concavity bounds") {
  const double S = concavity_segment_length(1.0);
  SUBCASE("exact values at the segment edge for L = 1") {
    const ConcavityBounds b = concavity_bounds(S, S);
    CHECK(std::abs(b.mu - 1.0) < 1e-12);
    CHECK(std::abs(b.ell - 3.0) < 1e-12);
  }
  SUBCASE("the ratio is always exactly 3") {
    for (double t : {S / 10, S / 3, S}) {
      const ConcavityBounds b = concavity_bounds(t, S);
      CHECK(b.ell == doctest::Approx(3.0 * b.mu).epsilon(1e-15));
    }
  }
  SUBCASE("mu grows without bound as the gap closes") {
    double previous = 0.0;
    for (double t : {S, S / 4, S / 16, S / 256}) {
      const double mu = concavity_bounds(t, S).mu;
      CHECK(mu > previous);
      previous = mu;
    }
    CHECK(previous > 1e2);
  }
  SUBCASE("gap beyond the window is a schedule violation") {
    CHECK_THROWS_AS(concavity_bounds(S * 1.01, S), ScheduleViolationError);
    CHECK_THROWS_AS(concavity_bounds(0.0, S), InputError);
  }
}

TEST_CASE("posterior exactness for the standard-Gaussian base") {
  // For base N(0, I), the auxiliary posterior is N(e^{-t'} anchor, (1-e^{-2t'}) I):
  // the inner drift (base score + tilt) must vanish at the posterior mean, and
  // plugging the mean into the estimator recovers the score exactly.
  RngStream rng(321);
  const Vec anchor = rng.normal_vec(2);
  const double t = 0.31;
  const double e1 = std::exp(-t), e2 = std::exp(-2.0 * t);

  const Vec mean = e1 * anchor;
  const Vec drift = Vec(-mean) + q_score_tilt(anchor, mean, t);
  CHECK(drift.norm() < 1e-10);

  const Vec estimate = -(anchor - e1 * mean) / (1.0 - e2);
  CHECK((estimate - Vec(-anchor)).norm() < 1e-12);
}
