#include "rsdmc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "rsdmc/rng.hpp"

namespace rsdmc {

namespace {

/// Fixed-tree pairwise summation; the reduction order never depends on how
/// the terms were produced.
double pairwise_sum(std::vector<double>& terms) {
  if (terms.empty()) return 0.0;
  std::size_t n = terms.size();
  while (n > 1) {
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < n / 2; ++i) terms[i] = terms[2 * i] + terms[2 * i + 1];
    if (n % 2 == 1) terms[n / 2] = terms[n - 1];
    n = half;
  }
  return terms[0];
}

/// Mean of k(a_i, b_j) over all pairs, diagonal included.
double kernel_mean(const Mat& a, const Mat& b, double inv_two_sigma_sq) {
  const int na = static_cast<int>(a.rows());
  const int nb = static_cast<int>(b.rows());
  std::vector<double> row_sums(na);
  for (int i = 0; i < na; ++i) {
    std::vector<double> row(nb);
    for (int j = 0; j < nb; ++j) {
      const double d2 = (a.row(i) - b.row(j)).squaredNorm();
      row[j] = std::exp(-d2 * inv_two_sigma_sq);
    }
    row_sums[i] = pairwise_sum(row);
  }
  return pairwise_sum(row_sums) / (static_cast<double>(na) * nb);
}

}  // namespace

std::string MmdReport::to_json() const {
  nlohmann::ordered_json j;
  j["mmd"] = mmd;
  j["bandwidth"] = bandwidth;
  j["n_x"] = n_x;
  j["n_y"] = n_y;
  j["estimator"] = estimator;
  return j.dump();
}

double median_heuristic(const Mat& x, const Mat& y, std::uint64_t seed) {
  const int total = static_cast<int>(x.rows() + y.rows());
  if (total < 2) throw InputError("median heuristic needs at least two points");
  if (x.cols() != y.cols()) throw InputError("point sets have different dimensions");

  Mat pool(total, x.cols());
  pool.topRows(x.rows()) = x;
  pool.bottomRows(y.rows()) = y;

  constexpr int kCap = 2000;
  if (total > kCap) {
    // deterministic partial Fisher-Yates pick of kCap rows
    std::vector<int> idx(total);
    std::iota(idx.begin(), idx.end(), 0);
    RngStream picker(seed);
    for (int i = 0; i < kCap; ++i) {
      const int j = i + static_cast<int>(picker.below(static_cast<std::uint64_t>(total - i)));
      std::swap(idx[i], idx[j]);
    }
    Mat sub(kCap, pool.cols());
    for (int i = 0; i < kCap; ++i) sub.row(i) = pool.row(idx[i]);
    pool.swap(sub);
  }

  const int n = static_cast<int>(pool.rows());
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) dists.push_back((pool.row(i) - pool.row(j)).norm());
  const std::size_t mid = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + mid, dists.end());
  return dists[mid];
}

MmdReport mmd_rbf(const Mat& x, const Mat& y, double bandwidth) {
  if (x.rows() == 0 || y.rows() == 0) throw InputError("MMD needs nonempty sets");
  if (x.cols() != y.cols()) throw InputError("point sets have different dimensions");
  if (bandwidth <= 0.0) throw InputError("degenerate bandwidth");

  const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
  const double mmd_sq =
      kernel_mean(x, x, inv) + kernel_mean(y, y, inv) - 2.0 * kernel_mean(x, y, inv);

  MmdReport report;
  report.mmd = std::sqrt(std::max(0.0, mmd_sq));
  report.bandwidth = bandwidth;
  report.n_x = static_cast<int>(x.rows());
  report.n_y = static_cast<int>(y.rows());
  return report;
}

ModeStats mode_stats(const Mat& points, const GaussianMixture& gmm) {
  if (gmm.modes() < 1) throw InputError("mode stats need at least one mode");
  const int n = static_cast<int>(points.rows());
  const int m = gmm.modes();

  ModeStats stats;
  stats.counts.assign(m, 0);
  stats.variances.assign(m, 0.0);
  if (n == 0) return stats;

  std::vector<int> assignment(n);
  for (int i = 0; i < n; ++i) {
    int best = 0;
    double best_d2 = (points.row(i) - gmm.means.row(0)).squaredNorm();
    for (int j = 1; j < m; ++j) {
      const double d2 = (points.row(i) - gmm.means.row(j)).squaredNorm();
      if (d2 < best_d2) {
        best = j;
        best_d2 = d2;
      }
    }
    assignment[i] = best;
    ++stats.counts[best];
  }

  const int d = static_cast<int>(points.cols());
  Mat mode_mean = Mat::Zero(m, d);
  for (int i = 0; i < n; ++i) mode_mean.row(assignment[i]) += points.row(i);
  for (int j = 0; j < m; ++j)
    if (stats.counts[j] > 0) mode_mean.row(j) /= stats.counts[j];

  std::vector<double> sq_dev(m, 0.0);
  for (int i = 0; i < n; ++i) {
    sq_dev[assignment[i]] += (points.row(i) - mode_mean.row(assignment[i])).squaredNorm();
  }
  for (int j = 0; j < m; ++j) {
    if (stats.counts[j] >= 2) {
      stats.variances[j] = sq_dev[j] / (static_cast<double>(stats.counts[j] - 1) * d);
    }
  }
  return stats;
}

}  // namespace rsdmc
