#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "rsdmc/experiment.hpp"

namespace fs = std::filesystem;
using namespace rsdmc;

namespace {

int resolve_workers(int cli_workers) {
  if (const char* env = std::getenv("RSDMC_WORKERS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  if (cli_workers > 0) return cli_workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void write_manifest(const fs::path& out_dir, const std::vector<std::string>& artifacts) {
  nlohmann::ordered_json manifest;
  manifest["artifacts"] = artifacts;
  std::ofstream out(out_dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

SamplerConfig load_sampler_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return SamplerConfig::from_json(buf.str());
}

/// The `sample` and `snapshot` subcommands accept either a full experiment
/// config (benchmark + knobs) with an embedded "cell" object, or rely on
/// defaults for everything but the benchmark.
std::pair<ExperimentConfig, SamplerConfig> load_cell(const std::string& path,
                                                     std::uint64_t seed_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const auto j = nlohmann::json::parse(buf.str(), nullptr, true, true);

  ExperimentConfig experiment = ExperimentConfig::from_json(buf.str());
  SamplerConfig cell;
  if (j.contains("cell")) {
    cell = SamplerConfig::from_json(j["cell"].dump());
  } else {
    cell.sampler = experiment.samplers.front();
    cell.budget = experiment.budgets.front();
    cell.particles = experiment.particles;
    cell.seed = experiment.seeds.front();
  }
  cell.particles = cell.particles > 0 ? cell.particles : experiment.particles;
  if (cell.variant.empty()) cell.variant = experiment.variant;
  if (cell.score_base.empty()) cell.score_base = experiment.score_base;
  if (cell.tau <= 0.0 && experiment.tau > 0.0) cell.tau = experiment.tau;
  if (cell.ula_tail_step <= 0.0 && experiment.ula_tail_step > 0.0)
    cell.ula_tail_step = experiment.ula_tail_step;
  if (cell.ula_step <= 0.0 && experiment.ula_step > 0.0) cell.ula_step = experiment.ula_step;
  if (seed_override) cell.seed = seed_override;
  return {experiment, cell};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reverse-diffusion sampling experiments with recursive score estimation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed_override = 0;
  int workers = 0;

  auto add_common = [&](CLI::App* cmd, bool with_seed) {
    cmd->add_option("--config", config_path, "JSON config path")->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--workers", workers, "worker threads (env RSDMC_WORKERS overrides)");
    if (with_seed) cmd->add_option("--seed", seed_override, "override the config seed");
  };

  auto* sample_cmd = app.add_subcommand("sample", "run one sampler and dump particles");
  add_common(sample_cmd, true);

  auto* report_cmd = app.add_subcommand("report", "run the full sweep and write a report");
  add_common(report_cmd, false);

  std::string checkpoint_text;
  auto* snapshot_cmd = app.add_subcommand("snapshot", "dump mid-run particle clouds");
  add_common(snapshot_cmd, true);
  snapshot_cmd->add_option("--checkpoints", checkpoint_text, "comma-separated gradient counts")
      ->required();

  double validate_L = 1.0;
  auto* validate_cmd = app.add_subcommand("validate-schedule", "check schedule inequalities");
  validate_cmd->add_option("--config", config_path, "JSON sampler config")->required();
  validate_cmd->add_option("--L", validate_L, "score smoothness constant");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(validate_cmd)) {
      const SamplerConfig cfg = load_sampler_config(config_path);
      const ScheduleParams params = practical_schedule(cfg);
      const auto violations = validate(params, validate_L);
      if (violations.empty()) {
        std::cout << "schedule ok: no violations\n";
        return 0;
      }
      for (const auto& v : violations) {
        std::cout << "violation " << v.name << " (margin " << v.margin << "): " << v.detail << '\n';
      }
      // reported, not fatal
      return 0;
    }

    fs::create_directories(out_dir);
    const int n_workers = resolve_workers(workers);

    if (app.got_subcommand(sample_cmd)) {
      auto [experiment, cell] = load_cell(config_path, seed_override);
      const ParticleSet set = run_one(experiment, cell, n_workers);
      const std::string csv = (fs::path(out_dir) / (cell.sampler + "_particles.csv")).string();
      dump_particles(set, csv);
      write_manifest(out_dir, {csv, csv + ".meta.json"});
      std::cout << "wrote " << csv << " (" << set.count() << " particles, "
                << set.grad_per_particle << " grads/particle)\n";
      return 0;
    }

    if (app.got_subcommand(snapshot_cmd)) {
      auto [experiment, cell] = load_cell(config_path, seed_override);
      std::vector<std::uint64_t> checkpoints;
      std::stringstream ss(checkpoint_text);
      std::string tok;
      while (std::getline(ss, tok, ',')) checkpoints.push_back(std::stoull(tok));
      const auto snaps = snapshot_trajectory(experiment, cell, checkpoints);
      std::vector<std::string> artifacts;
      for (std::size_t i = 0; i < snaps.size(); ++i) {
        const std::string csv =
            (fs::path(out_dir) /
             (cell.sampler + "_grad" + std::to_string(checkpoints[i]) + ".csv"))
                .string();
        dump_particles(snaps[i], csv);
        artifacts.push_back(csv);
      }
      write_manifest(out_dir, artifacts);
      std::cout << "wrote " << snaps.size() << " snapshots to " << out_dir << '\n';
      return 0;
    }

    // report
    const ExperimentConfig config = ExperimentConfig::from_json_file(config_path);
    const ExperimentReport report = run_experiment(config, n_workers);
    const std::string report_path = (fs::path(out_dir) / "report.json").string();
    std::ofstream out(report_path);
    out << report.to_json() << '\n';
    write_manifest(out_dir, {report_path});
    int failed = 0;
    for (const auto& cell : report.cells) {
      if (!cell.ok()) {
        ++failed;
        std::cerr << "cell failed: " << cell.sampler << " budget " << cell.budget << " seed "
                  << cell.seed << ": " << cell.error << '\n';
      }
    }
    std::cout << "wrote " << report_path << " (" << report.cells.size() << " cells, " << failed
              << " failed)\n";
    return failed == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
