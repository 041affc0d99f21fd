#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rsdmc/common.hpp"
#include "rsdmc/metrics.hpp"
#include "rsdmc/samplers.hpp"
#include "rsdmc/schedule.hpp"
#include "rsdmc/target.hpp"

namespace rsdmc {

/// Sweep description: samplers x budgets x seeds on one benchmark mixture.
struct ExperimentConfig {
  GaussianMixture benchmark;
  std::vector<std::string> samplers = {"ula", "dmc", "rsdmc-v2"};
  std::vector<std::uint64_t> budgets = {200, 400, 800, 1600, 3200};
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  int particles = 1000;
  int ground_truth_particles = 1000;
  std::uint64_t bandwidth_seed = 424242;

  // knobs forwarded into every non-ULA cell
  std::string variant = "paper";
  std::string score_base = "recursive";
  double tau = 0.0;
  double ula_tail_step = 0.0;
  double ula_step = 0.0;

  static ExperimentConfig from_json_file(const std::string& path);
  static ExperimentConfig from_json(const std::string& text);
  std::string to_json() const;
  std::uint64_t content_hash() const;
};

struct CellResult {
  std::string sampler;
  std::uint64_t budget = 0;
  std::uint64_t seed = 0;
  MmdReport mmd;
  ModeStats modes;
  double grad_per_particle = 0.0;
  double wall_ms = 0.0;
  std::string error;  // empty on success
  std::string schedule_json;

  bool ok() const { return error.empty(); }
};

struct ExperimentReport {
  int schema_version = 1;
  std::uint64_t config_hash = 0;
  double bandwidth = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<CellResult> cells;

  bool all_ok() const;
  /// Deterministic serialization; wall-clock fields are the only varying part.
  std::string to_json(bool include_wall_times = true) const;
  const CellResult* find(const std::string& sampler, std::uint64_t budget,
                         std::uint64_t seed) const;
};

/// Run the full sweep. Cells run concurrently up to `workers`; each cell is
/// deterministic in (config, seed) regardless of scheduling.
ExperimentReport run_experiment(const ExperimentConfig& config, int workers = 1);

/// Sample one cell by name. Used by the CLI `sample` subcommand and tests.
ParticleSet run_one(const ExperimentConfig& config, const SamplerConfig& cell, int workers = 1);

/// CSV with header x0,...,x{d-1} plus a sibling <path>.meta.json file.
void dump_particles(const ParticleSet& set, const std::string& path);
ParticleSet load_particles(const std::string& path);

/// Mid-run particle clouds at the given per-particle gradient counts.
/// Checkpoints must be ascending and within budget; 0 means the initialization.
std::vector<ParticleSet> snapshot_trajectory(const ExperimentConfig& config,
                                             const SamplerConfig& cell,
                                             const std::vector<std::uint64_t>& checkpoints);

}  // namespace rsdmc
