#include "rsdmc/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace rsdmc {

namespace {

// seed-space partition for the streams a cell consumes
constexpr std::uint64_t kGroundTruthSalt = 0x67726f756e64ULL;
constexpr std::uint64_t kSamplerSalt = 0x73616d706cULL;

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RngStream cell_stream(std::uint64_t seed, std::uint64_t salt, std::uint64_t budget) {
  return RngStream(seed).substream(salt).substream(budget);
}

SamplerConfig cell_config(const ExperimentConfig& config, const std::string& sampler,
                          std::uint64_t budget, std::uint64_t seed) {
  SamplerConfig cell;
  cell.sampler = sampler;
  cell.budget = budget;
  cell.particles = config.particles;
  cell.seed = seed;
  cell.variant = config.variant;
  cell.score_base = config.score_base;
  if (config.tau > 0.0) cell.tau = config.tau;
  if (config.ula_tail_step > 0.0) cell.ula_tail_step = config.ula_tail_step;
  if (config.ula_step > 0.0) cell.ula_step = config.ula_step;
  return cell;
}

ParticleSet dispatch(const ExperimentConfig& config, const SamplerConfig& cell,
                     const RunOptions& options, GradientCounter& counter) {
  const TargetDistribution target = make_gmm_target(config.benchmark);
  RngStream stream = cell_stream(cell.seed, kSamplerSalt, cell.budget);
  if (cell.sampler == "ula") {
    const double h = cell.ula_step > 0.0 ? cell.ula_step : 2e-4;
    const int steps = static_cast<int>(cell.budget);
    ParticleSet set = run_ula(target, cell.particles, steps, h, stream, counter, options);
    set.seed = cell.seed;
    return set;
  }
  ParticleSet set;
  if (cell.sampler == "dmc") {
    set = run_dmc(target, cell, cell.particles, stream, counter, options);
  } else {
    set = run_rsdmc(target, practical_schedule(cell), cell.particles, stream, counter, options);
  }
  set.seed = cell.seed;
  return set;
}

nlohmann::ordered_json cell_to_json(const CellResult& cell, bool include_wall) {
  nlohmann::ordered_json j;
  j["sampler"] = cell.sampler;
  j["budget"] = cell.budget;
  j["seed"] = cell.seed;
  if (cell.ok()) {
    j["mmd"] = nlohmann::ordered_json::parse(cell.mmd.to_json());
    j["mode_counts"] = cell.modes.counts;
    j["mode_variances"] = cell.modes.variances;
    j["grad_per_particle"] = cell.grad_per_particle;
    j["schedule"] = nlohmann::ordered_json::parse(cell.schedule_json);
  } else {
    j["error"] = cell.error;
  }
  j["wall_ms"] = include_wall ? cell.wall_ms : 0.0;
  return j;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("experiment config parse failure: ") + e.what());
  }
  ExperimentConfig c;
  if (!j.contains("benchmark")) throw ConfigError("experiment config needs a benchmark mixture");
  c.benchmark = GaussianMixture::from_json(j["benchmark"].dump());
  if (j.contains("samplers")) c.samplers = j["samplers"].get<std::vector<std::string>>();
  if (j.contains("budgets")) c.budgets = j["budgets"].get<std::vector<std::uint64_t>>();
  if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  if (j.contains("particles")) c.particles = j["particles"].get<int>();
  if (j.contains("ground_truth_particles"))
    c.ground_truth_particles = j["ground_truth_particles"].get<int>();
  if (j.contains("bandwidth_seed")) c.bandwidth_seed = j["bandwidth_seed"].get<std::uint64_t>();
  if (j.contains("variant")) c.variant = j["variant"].get<std::string>();
  if (j.contains("score_base")) c.score_base = j["score_base"].get<std::string>();
  if (j.contains("tau")) c.tau = j["tau"].get<double>();
  if (j.contains("ula_tail_step")) c.ula_tail_step = j["ula_tail_step"].get<double>();
  if (j.contains("ula_step")) c.ula_step = j["ula_step"].get<double>();
  if (c.samplers.empty() || c.budgets.empty() || c.seeds.empty())
    throw ConfigError("experiment config has an empty sweep axis");
  return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

std::string ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  j["benchmark"] = nlohmann::ordered_json::parse(benchmark.to_json());
  j["samplers"] = samplers;
  j["budgets"] = budgets;
  j["seeds"] = seeds;
  j["particles"] = particles;
  j["ground_truth_particles"] = ground_truth_particles;
  j["bandwidth_seed"] = bandwidth_seed;
  j["variant"] = variant;
  j["score_base"] = score_base;
  if (tau > 0.0) j["tau"] = tau;
  if (ula_tail_step > 0.0) j["ula_tail_step"] = ula_tail_step;
  if (ula_step > 0.0) j["ula_step"] = ula_step;
  return j.dump(2);
}

std::uint64_t ExperimentConfig::content_hash() const { return fnv1a(to_json()); }

bool ExperimentReport::all_ok() const {
  for (const auto& c : cells)
    if (!c.ok()) return false;
  return true;
}

std::string ExperimentReport::to_json(bool include_wall_times) const {
  nlohmann::ordered_json j;
  j["schema_version"] = schema_version;
  j["config_hash"] = config_hash;
  j["bandwidth"] = bandwidth;
  j["seeds"] = seeds;
  j["cells"] = nlohmann::ordered_json::array();
  for (const auto& c : cells) j["cells"].push_back(cell_to_json(c, include_wall_times));
  return j.dump(2);
}

const CellResult* ExperimentReport::find(const std::string& sampler, std::uint64_t budget,
                                         std::uint64_t seed) const {
  for (const auto& c : cells)
    if (c.sampler == sampler && c.budget == budget && c.seed == seed) return &c;
  return nullptr;
}

ParticleSet run_one(const ExperimentConfig& config, const SamplerConfig& cell, int workers) {
  RunOptions options;
  options.workers = workers;
  GradientCounter counter;
  return dispatch(config, cell, options, counter);
}

ExperimentReport run_experiment(const ExperimentConfig& config, int workers) {
  config.benchmark.check();

  ExperimentReport report;
  report.config_hash = config.content_hash();
  report.seeds = config.seeds;

  // one kernel for the whole experiment, from a dedicated ground-truth draw
  RngStream bw_stream = RngStream(config.bandwidth_seed).substream(kGroundTruthSalt);
  const Mat bw_sample = sample_gmm(config.benchmark, config.ground_truth_particles, bw_stream);
  report.bandwidth = median_heuristic(bw_sample, bw_sample);

  // fixed cell order; concurrency never reorders the report
  struct CellKey {
    std::string sampler;
    std::uint64_t budget;
    std::uint64_t seed;
  };
  std::vector<CellKey> keys;
  for (const auto& sampler : config.samplers)
    for (const auto budget : config.budgets)
      for (const auto seed : config.seeds) keys.push_back({sampler, budget, seed});
  report.cells.resize(keys.size());

  std::atomic<std::size_t> next{0};
  auto run_cell = [&](std::size_t idx) {
    const CellKey& key = keys[idx];
    CellResult& cell = report.cells[idx];
    cell.sampler = key.sampler;
    cell.budget = key.budget;
    cell.seed = key.seed;
    const auto start = std::chrono::steady_clock::now();
    try {
      const SamplerConfig cfg = cell_config(config, key.sampler, key.budget, key.seed);
      GradientCounter counter;
      RunOptions options;  // cells are the unit of parallelism here
      ParticleSet set = dispatch(config, cfg, options, counter);

      RngStream gt_stream = cell_stream(key.seed, kGroundTruthSalt, 0);
      const Mat gt = sample_gmm(config.benchmark, config.ground_truth_particles, gt_stream);

      cell.mmd = mmd_rbf(set.points, gt, report.bandwidth);
      cell.modes = mode_stats(set.points, config.benchmark);
      cell.grad_per_particle = set.grad_per_particle;
      cell.schedule_json = set.meta_json;
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    cell.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  };

  const int pool_size = std::max(1, std::min<int>(workers, static_cast<int>(keys.size())));
  if (pool_size == 1) {
    for (std::size_t i = 0; i < keys.size(); ++i) run_cell(i);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(pool_size);
    for (int w = 0; w < pool_size; ++w) {
      pool.emplace_back([&]() {
        for (std::size_t i = next.fetch_add(1); i < keys.size(); i = next.fetch_add(1)) run_cell(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  return report;
}

void dump_particles(const ParticleSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open for writing: " + path);
  for (int c = 0; c < set.dim(); ++c) {
    if (c) out << ',';
    out << 'x' << c;
  }
  out << '\n';
  char buf[32];
  for (int i = 0; i < set.count(); ++i) {
    for (int c = 0; c < set.dim(); ++c) {
      if (c) out << ',';
      std::snprintf(buf, sizeof buf, "%.17g", set.points(i, c));
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw InputError("write failure: " + path);

  nlohmann::ordered_json meta;
  meta["sampler"] = set.sampler_id;
  meta["seed"] = set.seed;
  meta["particles"] = set.count();
  meta["grad_per_particle"] = set.grad_per_particle;
  meta["schedule"] = set.meta_json.empty()
                         ? nlohmann::ordered_json(nullptr)
                         : nlohmann::ordered_json::parse(set.meta_json);
  std::ofstream meta_out(path + ".meta.json");
  if (!meta_out) throw InputError("cannot open for writing: " + path + ".meta.json");
  meta_out << meta.dump(2) << '\n';
}

ParticleSet load_particles(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open: " + path);
  std::string header;
  if (!std::getline(in, header)) throw InputError("empty particle file: " + path);
  int dim = 1;
  for (char ch : header)
    if (ch == ',') ++dim;

  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string fieldtext;
    int fields = 0;
    while (std::getline(row, fieldtext, ',')) {
      values.push_back(std::stod(fieldtext));
      ++fields;
    }
    if (fields != dim) throw InputError("ragged particle row in " + path);
  }

  ParticleSet set;
  const int n = static_cast<int>(values.size()) / dim;
  set.points.resize(n, dim);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < dim; ++c) set.points(i, c) = values[static_cast<std::size_t>(i) * dim + c];

  std::ifstream meta_in(path + ".meta.json");
  if (meta_in) {
    nlohmann::json meta;
    meta_in >> meta;
    if (meta.contains("sampler")) set.sampler_id = meta["sampler"].get<std::string>();
    if (meta.contains("seed")) set.seed = meta["seed"].get<std::uint64_t>();
    if (meta.contains("grad_per_particle"))
      set.grad_per_particle = meta["grad_per_particle"].get<double>();
    if (meta.contains("schedule") && !meta["schedule"].is_null())
      set.meta_json = meta["schedule"].dump();
  }
  return set;
}

std::vector<ParticleSet> snapshot_trajectory(const ExperimentConfig& config,
                                             const SamplerConfig& cell,
                                             const std::vector<std::uint64_t>& checkpoints) {
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
      throw InputError("checkpoints must be strictly ascending");
    if (checkpoints[i] > cell.budget) throw InputError("checkpoint beyond the gradient budget");
  }

  std::vector<ParticleSet> snaps(checkpoints.size());
  for (auto& s : snaps) {
    s.points.resize(cell.particles, config.benchmark.dim());
    s.sampler_id = cell.sampler;
    s.seed = cell.seed;
  }
  // per-particle cursor over the checkpoint list; states are copied mid-run
  std::vector<std::size_t> cursor(static_cast<std::size_t>(cell.particles), 0);

  RunOptions options;
  options.observer = [&](int particle, int, std::uint64_t grads, const Vec& state) {
    auto& pos = cursor[static_cast<std::size_t>(particle)];
    while (pos < checkpoints.size() && grads >= checkpoints[pos]) {
      snaps[pos].points.row(particle) = state.transpose();
      ++pos;
    }
  };

  GradientCounter counter;
  ParticleSet final_set = dispatch(config, cell, options, counter);
  for (std::size_t s = 0; s < snaps.size(); ++s) {
    snaps[s].grad_per_particle = static_cast<double>(checkpoints[s]);
    snaps[s].meta_json = final_set.meta_json;
  }
  return snaps;
}

}  // namespace rsdmc
