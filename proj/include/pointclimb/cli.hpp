#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "pointclimb/harness.hpp"

namespace pointclimb {

// Declarative description of a benchmark sweep: dataset, scenario, the
// (backbone x loss x seed) grid, and training settings.
struct ExperimentConfig {
  std::string dataset_kind = "synthetic";  // "synthetic" | "modelnet40"
  std::string dataset_path;                // modelnet40 h5 root
  int synthetic_classes = 10;
  int synthetic_samples_per_class = 24;
  int synthetic_points = 128;
  uint64_t synthetic_seed = 0;

  std::string scenario_kind = "fixed";  // "fixed" | "veristic"
  std::vector<int> scenario_sizes = {4, 2, 2, 2};
  int veristic_tc = 40;
  int veristic_low = 3;
  int veristic_high = 8;
  uint64_t scenario_seed = 0;

  std::vector<std::string> backbones = {"pointnet_lite"};
  std::vector<std::string> losses = {"ft"};
  std::vector<uint64_t> seeds = {1};
  TrainConfig train;
  std::string output_dir = "runs/out";
  int workers = 1;
  bool sample_std = false;
};

// Env var overriding the modelnet40 dataset path.
extern const char* const kDatasetRootEnv;

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);

// Full fail-fast validation; throws std::invalid_argument before any
// training compute happens.
void validate_experiment(const ExperimentConfig& config);

Dataset load_experiment_dataset(const ExperimentConfig& config);
Scenario make_experiment_scenario(const ExperimentConfig& config);

// Executes the whole grid over a bounded worker pool, writes per-run
// manifests and checkpoints plus the aggregate report under output_dir.
// Returns 0 when every run completed, 1 when any failed (survivors are
// still aggregated).
int run_experiment(const ExperimentConfig& config, std::ostream& log);

// Re-aggregates the manifests under dir/runs into fresh report files.
int report_runs(const std::string& dir, bool sample_std, std::ostream& log);

// Replays the bundle's internal invariants: schema, accuracy arithmetic,
// access audit, aggregate consistency. Returns 0 on pass, 1 on violation.
int verify_bundle(const std::string& dir, std::ostream& log);

// `pointclimb sample|run|report|verify`; exit codes: 0 success, 1 run or
// verification failure, 2 configuration error.
int cli_main(int argc, const char* const* argv);

}  // namespace pointclimb
