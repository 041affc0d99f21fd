#include "rsdmc/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

namespace rsdmc {

namespace {

int count_from_formula(double raw, const char* what) {
  if (!(raw >= 1.0)) throw ScheduleViolationError(std::string(what) + " formula gave a count below 1");
  if (raw > 2e9) throw ScheduleViolationError(std::string(what) + " count exceeds integer range; desk-scale run infeasible");
  return static_cast<int>(std::llround(std::ceil(raw)));
}

}  // namespace

int ScheduleParams::n_chains_int() const { return count_from_formula(n_chains, "n"); }

int ScheduleParams::m_steps_int(double x_norm) const {
  return count_from_formula(m_steps ? m_steps(x_norm) : m_const, "m");
}

std::string ScheduleParams::to_json() const {
  nlohmann::ordered_json j;
  j["sampler"] = sampler;
  j["S"] = S;
  j["K"] = K;
  j["eta"] = eta;
  j["R"] = R;
  j["tau"] = tau_const;
  j["n"] = n_chains;
  j["m"] = m_const;
  j["l"] = l;
  j["l_rec"] = l_rec;
  j["log_delta"] = log_delta;
  j["delta_clamped"] = delta_clamped;
  j["variant"] = to_string(variant);
  j["score_base"] = to_string(score_base);
  j["ula_tail"] = ula_tail;
  j["ula_tail_step"] = ula_tail_step;
  j["budget"] = budget;
  return j.dump();
}

ScheduleParams theoretical_schedule(double L, double M, int d, double eps,
                                    const TheoreticalOptions& opts) {
  if (L < 1.0) throw InputError("theoretical schedule assumes L >= 1");
  if (M < 0.0) throw InputError("second moment must be nonnegative");
  if (d < 1) throw InputError("dimension must be positive");
  if (eps <= 0.0 || eps >= 1.0) throw InputError("tolerance must lie in (0, 1)");

  ScheduleParams p;
  p.sampler = "theoretical";
  p.S = concavity_segment_length(L);
  const double A = std::log((L * d + M) / eps);
  p.K = static_cast<int>(std::ceil(2.0 * A / p.S));

  const double c_eta = std::pow(2.0, -14.0) / (L * L);
  p.eta = c_eta * eps / (M + d);
  p.R = static_cast<int>(std::ceil(p.S / p.eta));

  p.l = 10.0 * eps;
  p.l_rec = eps / 960.0;

  const double c_n = 64.0 * 25.0 / c_eta;
  const double c_m1 = std::log(2.0 * M * 9.0 * 5.0 * L) + 3.0 * M * L;
  const double c_m = 512.0 * 9.0 * 125.0 * c_m1 * std::pow(c_eta, -1.5);

  // delta in log space; the nested power expression underflows any float.
  const double log_z = std::log(opts.particle_norm_bound);
  const double c_u1 = std::log(5.0 * c_n * c_m / 1e4) + std::log(2.0 * std::max(log_z, 0.5));
  const double c_u2 = 70.0 / (p.S * p.S) + 10.0 / p.S;
  const double c_u3 = 2.0 * c_u1 / p.S;
  const double log_inner = std::log(c_eta * p.S * eps * eps / (4.0 * (d + M))) -
                           2.0 * std::log(A) + (-c_u2 * A - c_u3) * A;
  p.log_delta = -(2.0 / p.S) * A * std::log(2.0) + ((2.0 / p.S) * A + 1.0) * log_inner;

  p.clamp_ceiling = opts.clamp_ceiling;
  double tail_term = std::max(static_cast<double>(d), -2.0 * p.log_delta);
  if (tail_term > opts.clamp_ceiling) {
    tail_term = opts.clamp_ceiling;
    p.delta_clamped = true;
  }

  // n and m evaluated at the recursion tolerance, the value every
  // recursive call actually sees.
  const double tol = p.l_rec;
  p.n_chains = c_n * (d + M) / (tol * tol) * tail_term;
  const double m_scale = c_m * std::pow(d + M, 3.0) / (tol * tol * tol);
  p.m_steps = [m_scale](double x_norm) {
    const double lognorm = x_norm > 0.0 ? std::log(x_norm * x_norm) : 1.0;
    return m_scale * std::max(lognorm, 1.0);
  };
  p.m_const = m_scale;  // the max{.,1} factor at its floor

  const double tau_scale = eps / (32.0 * 9.0 * d);
  p.tau_rule = [tau_scale](double t_gap) {
    const double e2 = std::exp(-2.0 * t_gap);
    return tau_scale * std::exp(2.0 * t_gap) * (1.0 - e2) * (1.0 - e2);
  };
  p.tau_const = std::numeric_limits<double>::quiet_NaN();
  return p;
}

SamplerConfig SamplerConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("sampler config parse failure: ") + e.what());
  }
  SamplerConfig c;
  if (j.contains("sampler")) c.sampler = j["sampler"].get<std::string>();
  if (j.contains("budget")) c.budget = j["budget"].get<std::uint64_t>();
  if (j.contains("particles")) c.particles = j["particles"].get<int>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("K")) c.K = j["K"].get<int>();
  if (j.contains("R")) c.R = j["R"].get<int>();
  if (j.contains("eta")) c.eta = j["eta"].get<double>();
  if (j.contains("tau")) c.tau = j["tau"].get<double>();
  if (j.contains("n")) c.n = j["n"].get<double>();
  if (j.contains("m")) c.m = j["m"].get<double>();
  if (j.contains("ula_tail")) c.ula_tail = j["ula_tail"].get<int>();
  if (j.contains("ula_tail_step")) c.ula_tail_step = j["ula_tail_step"].get<double>();
  if (j.contains("ula_step")) c.ula_step = j["ula_step"].get<double>();
  if (j.contains("variant")) c.variant = j["variant"].get<std::string>();
  if (j.contains("score_base")) c.score_base = j["score_base"].get<std::string>();
  return c;
}

std::string SamplerConfig::to_json() const {
  nlohmann::ordered_json j;
  j["sampler"] = sampler;
  j["budget"] = budget;
  j["particles"] = particles;
  j["seed"] = seed;
  if (K > 0) j["K"] = K;
  if (R > 0) j["R"] = R;
  if (eta > 0.0) j["eta"] = eta;
  if (tau > 0.0) j["tau"] = tau;
  if (n > 0.0) j["n"] = n;
  if (m > 0.0) j["m"] = m;
  if (ula_tail >= 0) j["ula_tail"] = ula_tail;
  if (ula_tail_step > 0.0) j["ula_tail_step"] = ula_tail_step;
  if (ula_step > 0.0) j["ula_step"] = ula_step;
  if (!variant.empty()) j["variant"] = variant;
  if (!score_base.empty()) j["score_base"] = score_base;
  return j.dump();
}

ScheduleParams practical_schedule(const SamplerConfig& config) {
  const std::string& name = config.sampler;
  if (name != "ula" && name != "dmc" && name != "rsdmc-v1" && name != "rsdmc-v2")
    throw ConfigError("unknown sampler '" + name + "' (expected ula|dmc|rsdmc-v1|rsdmc-v2)");

  ScheduleParams p;
  p.sampler = name;
  p.budget = config.budget;

  if (name == "ula") {
    // baseline: plain overdamped Langevin on the target
    p.K = 1;
    p.R = config.R > 0 ? config.R : static_cast<int>(config.budget);
    p.eta = config.ula_step > 0.0 ? config.ula_step : 2e-4;
    p.S = p.R * p.eta;
    p.tau_const = 0.0;
    p.n_chains = 1.0;
    p.m_const = 1.0;
    return p;
  }

  // Reference experiment: 200 outer iterations split into K = 2 segments of
  // R = 100 steps at eta = 0.05, so each segment spans S = 5 time units. The
  // budget sweep refines eta at that fixed horizon. DMC runs the whole
  // horizon as one segment.
  const int k_default = (name == "dmc") ? 1 : 2;
  p.K = config.K > 0 ? config.K : k_default;
  const double horizon = 10.0;  // K_ref * R_ref * eta_ref
  if (config.R > 0) {
    p.R = config.R;
  } else {
    if (config.budget % p.K != 0)
      throw ConfigError("budget must divide evenly into " + std::to_string(p.K) + " segments");
    p.R = static_cast<int>(config.budget / p.K);
  }
  p.eta = config.eta > 0.0 ? config.eta : horizon / (p.K * p.R);
  p.S = p.R * p.eta;

  const double tau = config.tau > 0.0 ? config.tau : 0.01;
  p.tau_const = tau;
  p.tau_rule = [tau](double) { return tau; };
  p.n_chains = config.n > 0.0 ? config.n : 1.0;
  p.m_const = config.m > 0.0 ? config.m : 1.0;
  p.m_steps = [m = p.m_const](double) { return m; };

  if (name == "rsdmc-v2") {
    // 10 tail iterations at the reference budget of 200; the sweep keeps the
    // replaced reverse-time window fixed rather than the iteration count.
    p.ula_tail = config.ula_tail >= 0
                     ? config.ula_tail
                     : static_cast<int>(std::llround(static_cast<double>(p.K * p.R) * 0.05));
  } else {
    p.ula_tail = config.ula_tail >= 0 ? config.ula_tail : 0;
  }
  p.ula_tail_step = config.ula_tail_step > 0.0 ? config.ula_tail_step : 0.004;

  p.variant = config.variant.empty() ? DriftVariant::kPaper
                                     : drift_variant_from_string(config.variant);
  p.score_base = config.score_base.empty() ? ScoreBase::kRecursive
                                           : score_base_from_string(config.score_base);
  return p;
}

std::vector<ScheduleViolation> validate(const ScheduleParams& params, double L) {
  std::vector<ScheduleViolation> out;
  if (params.sampler == "ula") return out;  // no segmented-schedule claims to check

  const double s_bound = concavity_segment_length(L);
  if (params.S > s_bound * (1.0 + 1e-12)) {
    out.push_back({"segment_length", params.S - s_bound,
                   "S = " + std::to_string(params.S) + " exceeds (1/2) log((2L+1)/(2L)) = " +
                       std::to_string(s_bound)});
  }
  if (params.eta > 0.5) {
    out.push_back({"outer_step", params.eta - 0.5,
                   "eta = " + std::to_string(params.eta) + " exceeds 1/2"});
  }
  const double recon = std::abs(params.R * params.eta - params.S);
  if (recon > params.eta * (1.0 + 1e-9)) {
    out.push_back({"horizon_reconstruction", recon - params.eta,
                   "R*eta misses S by more than one step"});
  }

  if (params.tau_rule) {
    // tau(t') <= mu_r / (8 L_r^2) across the reverse grid; with ell = 3 mu
    // the bound is 1/(72 mu_r). Sample the grid (capped for huge R).
    double worst = 0.0;
    double worst_gap = 0.0;
    const int grid = std::min(params.R, 2048);
    for (int i = 0; i < grid; ++i) {
      const int r = static_cast<int>(static_cast<double>(i) * params.R / grid);
      const double t_gap = TimeIndex{0, r}.gap(params.S, params.eta);
      if (t_gap <= 0.0) continue;
      const double ratio = std::exp(-2.0 * t_gap) / (-std::expm1(-2.0 * t_gap));
      const double mu = 0.5 * ratio;
      const double bound = 1.0 / (72.0 * mu);
      const double excess = params.tau_rule(t_gap) - bound;
      if (excess > worst) {
        worst = excess;
        worst_gap = t_gap;
      }
    }
    if (worst > 1e-15) {
      out.push_back({"inner_step_lemma", worst,
                     "tau exceeds mu_r/(8 L_r^2) by " + std::to_string(worst) +
                         " at t' = " + std::to_string(worst_gap)});
    }
  }
  return out;
}

}  // namespace rsdmc
