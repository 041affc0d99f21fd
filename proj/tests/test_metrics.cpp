#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "oracle_helpers.hpp"
#include "rsdmc/metrics.hpp"

using namespace rsdmc;

TEST_CASE("median heuristic basics") {
  SUBCASE("two points at distance three") {
    Mat x(1, 1), y(1, 1);
    x << 0.0;
    y << 3.0;
    CHECK(median_heuristic(x, y) == doctest::Approx(3.0));
  }
  SUBCASE("identical points give zero, rejected downstream") {
    Mat x = Mat::Zero(5, 2), y = Mat::Zero(4, 2);
    CHECK(median_heuristic(x, y) == 0.0);
    CHECK_THROWS_AS(mmd_rbf(x, y, 0.0), InputError);
  }
  SUBCASE("fewer than two points is an input error") {
    Mat x(1, 1), y(0, 1);
    x << 1.0;
    CHECK_THROWS_AS(median_heuristic(x, y), InputError);
  }
  SUBCASE("stable on the benchmark under subsample-seed change") {
    const GaussianMixture g = oracle::benchmark6();
    RngStream rng(12);
    const Mat gt = sample_gmm(g, 3000, rng);  // large enough to trigger subsampling
    const double a = median_heuristic(gt, gt, 1);
    const double b = median_heuristic(gt, gt, 2);
    CHECK(a > 0.0);
    CHECK(std::abs(a - b) / a < 0.05);
  }
}

TEST_CASE("MMD of a set against itself is zero") {
  RngStream rng(31);
  Mat x(40, 3);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  const MmdReport report = mmd_rbf(x, x, 1.5);
  CHECK(report.mmd < 1e-12);
  CHECK(report.estimator == "biased");
  CHECK(report.n_x == 40);
}

TEST_CASE("MMD is symmetric in its arguments") {
  RngStream rng(32);
  Mat x(25, 2), y(35, 2);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  for (int i = 0; i < y.size(); ++i) y.data()[i] = rng.normal() + 0.5;
  CHECK(mmd_rbf(x, y, 2.0).mmd == mmd_rbf(y, x, 2.0).mmd);
}

TEST_CASE("separated Gaussians saturate at the closed-form kernel expectation") {
  // X ~ N(0,1), Y ~ N(10,1), sigma = 1: cross terms vanish and each self term
  // approaches E k = sigma / sqrt(sigma^2 + 2) = 1/sqrt(3).
  RngStream rng(64);
  const int n = 2000;
  Mat x(n, 1), y(n, 1);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rng.normal();
    y(i, 0) = 10.0 + rng.normal();
  }
  const MmdReport report = mmd_rbf(x, y, 1.0);
  const double expected_sq = 2.0 / std::sqrt(3.0);
  CHECK(std::abs(report.mmd * report.mmd - expected_sq) < 0.05);
}

TEST_CASE("MMD increases with the shift between the sets") {
  RngStream rng(65);
  const int n = 800;
  Mat x(n, 1);
  for (int i = 0; i < n; ++i) x(i, 0) = rng.normal();
  double previous = -1.0;
  for (double shift : {0.0, 1.0, 2.0, 4.0}) {
    Mat y = x.array() + shift;
    const double mmd = mmd_rbf(x, y, 1.0).mmd;
    CHECK(mmd > previous);
    previous = mmd;
  }
}

TEST_CASE("bandwidth extremes wash out or sharpen the statistic monotonically") {
  const GaussianMixture g = oracle::benchmark6();
  RngStream rng(66);
  const Mat gt = sample_gmm(g, 400, rng);
  Mat shifted = gt;
  shifted.col(0).array() += 2.0;
  const double base = median_heuristic(gt, shifted);
  const double wide = mmd_rbf(gt, shifted, base * 1e6).mmd;
  const double mid = mmd_rbf(gt, shifted, base).mmd;
  const double narrow = mmd_rbf(gt, shifted, base / 1e6).mmd;
  CHECK(wide < mid);
  CHECK(mid < narrow);
  CHECK(wide < 1e-3);
  // disjoint supports at a tiny kernel: MMD^2 -> (1 + 1) - 0 up to diagonal mass
  CHECK(narrow * narrow > 1.9);
}

TEST_CASE("MMD input validation") {
  Mat x(3, 2), y(3, 3);
  x.setZero();
  y.setZero();
  CHECK_THROWS_AS(mmd_rbf(x, y, 1.0), InputError);
  Mat empty(0, 2);
  Mat ok = Mat::Zero(3, 2);
  CHECK_THROWS_AS(mmd_rbf(empty, ok, 1.0), InputError);
}

TEST_CASE("report serialization carries the exact field names") {
  Mat x = Mat::Zero(2, 1), y = Mat::Ones(2, 1);
  const MmdReport report = mmd_rbf(x, y, 1.0);
  const std::string j = report.to_json();
  for (const char* field : {"\"mmd\"", "\"bandwidth\"", "\"n_x\"", "\"n_y\"", "\"estimator\""}) {
    CHECK(j.find(field) != std::string::npos);
  }
}

TEST_CASE("mode stats recover the configured variance on exact draws") {
  const GaussianMixture g = oracle::benchmark6();
  RngStream rng(4242);
  const Mat pts = sample_gmm(g, 6000, rng);
  const ModeStats stats = mode_stats(pts, g);
  int total = 0;
  for (int j = 0; j < 6; ++j) {
    total += stats.counts[j];
    CHECK(std::abs(stats.variances[j] - 0.01) < 0.006);
  }
  CHECK(total == 6000);
}

TEST_CASE("single particle at a center belongs to that mode with zero variance") {
  const GaussianMixture g = oracle::benchmark6();
  Mat pts(1, 2);
  pts << g.means(3, 0), g.means(3, 1);
  const ModeStats stats = mode_stats(pts, g);
  CHECK(stats.counts[3] == 1);
  CHECK(stats.variances[3] == 0.0);
}

TEST_CASE("empty input gives empty stats") {
  const ModeStats stats = mode_stats(Mat(0, 2), oracle::benchmark6());
  for (int c : stats.counts) CHECK(c == 0);
}
