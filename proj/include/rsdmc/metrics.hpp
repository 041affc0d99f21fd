#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsdmc/common.hpp"
#include "rsdmc/target.hpp"

namespace rsdmc {

struct MmdReport {
  double mmd = 0.0;
  double bandwidth = 0.0;
  int n_x = 0;
  int n_y = 0;
  std::string estimator = "biased";

  std::string to_json() const;
};

/// Median of pairwise Euclidean distances over the union of both sets,
/// subsampled to at most 2000 points (deterministic in `seed`).
double median_heuristic(const Mat& x, const Mat& y, std::uint64_t seed = 0x6d6d6475ULL);

/// Biased V-statistic MMD with the RBF kernel exp(-||a-b||^2 / (2 sigma^2)).
/// Kernel sums use a fixed pairwise reduction so reports reproduce exactly.
MmdReport mmd_rbf(const Mat& x, const Mat& y, double bandwidth);

struct ModeStats {
  std::vector<int> counts;
  std::vector<double> variances;  // per-coordinate sample variance, averaged over coordinates
};

/// Assign each particle to the nearest mode center and summarize.
ModeStats mode_stats(const Mat& points, const GaussianMixture& gmm);

}  // namespace rsdmc
