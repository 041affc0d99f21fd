#include "rsdmc/target.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"

namespace rsdmc {

namespace {

void check_point(const GaussianMixture& gmm, const Vec& x) {
  if (x.size() != gmm.dim())
    throw InputError("point has dimension " + std::to_string(x.size()) + ", mixture expects " +
                     std::to_string(gmm.dim()));
}

/// log w_i + log N(x; mu_i, sigma_i^2 I) for every mode.
Vec component_log_terms(const GaussianMixture& gmm, const Vec& x) {
  const int m = gmm.modes();
  const double d = static_cast<double>(gmm.dim());
  Vec terms(m);
  for (int i = 0; i < m; ++i) {
    const double v = gmm.variances[i];
    const double sq = (x - gmm.means.row(i).transpose()).squaredNorm();
    terms[i] = std::log(gmm.weights[i]) - 0.5 * d * std::log(2.0 * M_PI * v) - sq / (2.0 * v);
  }
  return terms;
}

}  // namespace

void GaussianMixture::check() const {
  if (modes() < 1) throw InputError("mixture needs at least one mode");
  if (weights.size() != modes() || variances.size() != modes())
    throw InputError("weights/means/variances have inconsistent mode counts");
  if (std::abs(weights.sum() - 1.0) > 1e-12) throw InputError("mixture weights must sum to 1");
  for (int i = 0; i < modes(); ++i) {
    if (weights[i] < 0.0) throw InputError("mixture weights must be nonnegative");
    if (variances[i] <= 0.0) throw InputError("mixture variances must be strictly positive");
  }
}

std::string GaussianMixture::to_json() const {
  nlohmann::ordered_json j;
  j["weights"] = std::vector<double>(weights.data(), weights.data() + weights.size());
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < modes(); ++i) {
    rows.emplace_back(means.row(i).data(), means.row(i).data() + means.cols());
  }
  j["means"] = rows;
  j["variances"] = std::vector<double>(variances.data(), variances.data() + variances.size());
  return j.dump();
}

GaussianMixture GaussianMixture::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("mixture JSON parse failure: ") + e.what());
  }
  if (!j.contains("weights") || !j.contains("means") || !j.contains("variances"))
    throw ConfigError("mixture JSON needs weights, means, variances");
  GaussianMixture gmm;
  const auto w = j["weights"].get<std::vector<double>>();
  const auto rows = j["means"].get<std::vector<std::vector<double>>>();
  const auto v = j["variances"].get<std::vector<double>>();
  if (rows.empty()) throw ConfigError("mixture JSON has no means");
  gmm.weights = Eigen::Map<const Vec>(w.data(), static_cast<int>(w.size()));
  gmm.variances = Eigen::Map<const Vec>(v.data(), static_cast<int>(v.size()));
  gmm.means.resize(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw ConfigError("mixture JSON means are ragged");
    gmm.means.row(static_cast<int>(i)) =
        Eigen::Map<const Vec>(rows[i].data(), static_cast<int>(rows[i].size())).transpose();
  }
  gmm.check();
  return gmm;
}

double gmm_log_density(const GaussianMixture& gmm, const Vec& x) {
  check_point(gmm, x);
  const Vec terms = component_log_terms(gmm, x);
  const double top = terms.maxCoeff();
  return top + std::log((terms.array() - top).exp().sum());
}

Vec gmm_grad_log_density(const GaussianMixture& gmm, const Vec& x, GradientCounter& counter) {
  check_point(gmm, x);
  counter.increment();
  Vec terms = component_log_terms(gmm, x);
  const double top = terms.maxCoeff();
  Vec resp = (terms.array() - top).exp();
  resp /= resp.sum();
  Vec grad = Vec::Zero(gmm.dim());
  for (int i = 0; i < gmm.modes(); ++i) {
    grad += resp[i] / gmm.variances[i] * (gmm.means.row(i).transpose() - x);
  }
  return grad;
}

GaussianMixture diffuse_gmm(const GaussianMixture& gmm, double t) {
  if (t < 0.0) throw InputError("diffusion time must be nonnegative");
  const double shrink = std::exp(-t);
  const double fill = -std::expm1(-2.0 * t);  // 1 - e^{-2t}
  GaussianMixture out = gmm;
  out.means *= shrink;
  out.variances = (gmm.variances.array() * shrink * shrink + fill).matrix();
  return out;
}

Vec analytic_score(const GaussianMixture& gmm, double t, const Vec& x) {
  const GaussianMixture diffused = diffuse_gmm(gmm, t);
  GradientCounter scratch;  // never observed; the analytic oracle is uncounted
  return gmm_grad_log_density(diffused, x, scratch);
}

Mat sample_gmm(const GaussianMixture& gmm, int n, RngStream& rng) {
  if (n < 0) throw InputError("sample count must be nonnegative");
  Mat out(n, gmm.dim());
  // cumulative weights for the categorical pick
  Vec cumulative(gmm.modes());
  double acc = 0.0;
  for (int i = 0; i < gmm.modes(); ++i) {
    acc += gmm.weights[i];
    cumulative[i] = acc;
  }
  for (int row = 0; row < n; ++row) {
    const double u = rng.uniform();
    int mode = 0;
    while (mode + 1 < gmm.modes() && u > cumulative[mode]) ++mode;
    const double sd = std::sqrt(gmm.variances[mode]);
    for (int c = 0; c < gmm.dim(); ++c) {
      out(row, c) = gmm.means(mode, c) + sd * rng.normal();
    }
  }
  return out;
}

TargetDistribution make_gmm_target(const GaussianMixture& gmm, std::optional<double> smoothness_L) {
  gmm.check();
  TargetDistribution target;
  target.dim = gmm.dim();

  // E||x||^2 = sum_i w_i (||mu_i||^2 + d sigma_i^2), exact.
  double m2 = 0.0;
  for (int i = 0; i < gmm.modes(); ++i) {
    m2 += gmm.weights[i] * (gmm.means.row(i).squaredNorm() + gmm.dim() * gmm.variances[i]);
  }
  target.second_moment_M = m2;

  if (smoothness_L) {
    target.smoothness_L = *smoothness_L;
  } else {
    // Hessian of log p_t is -A_t + responsibility covariance of the scaled
    // means; bound its norm by 1/v_min + D^2/v_min^2 with D the mean diameter.
    // v_min = min variance along the whole diffusion path.
    double v_min = 1.0;
    for (int i = 0; i < gmm.modes(); ++i) v_min = std::min(v_min, gmm.variances[i]);
    double diameter = 0.0;
    for (int i = 0; i < gmm.modes(); ++i)
      for (int j = i + 1; j < gmm.modes(); ++j)
        diameter = std::max(diameter, (gmm.means.row(i) - gmm.means.row(j)).norm());
    target.smoothness_L = 1.0 / v_min + diameter * diameter / (v_min * v_min);
  }

  target.log_density = [gmm](const Vec& x) { return gmm_log_density(gmm, x); };
  target.grad_log_density = [gmm](const Vec& x, GradientCounter& counter) {
    return gmm_grad_log_density(gmm, x, counter);
  };
  target.analytic_diffused_score = [gmm](double t, const Vec& x) {
    return analytic_score(gmm, t, x);
  };
  return target;
}

TargetDistribution make_standard_gaussian_target(int dim) {
  if (dim < 1) throw InputError("dimension must be positive");
  TargetDistribution target;
  target.dim = dim;
  target.smoothness_L = 1.0;
  target.second_moment_M = static_cast<double>(dim);
  target.log_density = [](const Vec& x) { return -0.5 * x.squaredNorm(); };
  target.grad_log_density = [](const Vec& x, GradientCounter& counter) {
    counter.increment();
    return Vec(-x);
  };
  target.analytic_diffused_score = [](double, const Vec& x) { return Vec(-x); };
  return target;
}

}  // namespace rsdmc
