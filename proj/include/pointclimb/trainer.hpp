#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pointclimb/backbones.hpp"
#include "pointclimb/data.hpp"
#include "pointclimb/losses.hpp"
#include "pointclimb/sampler.hpp"

namespace pointclimb {

struct TrainConfig {
  int epochs = 40;
  int batch_size = 32;
  double lr = 1e-4;
  int n_points = 1024;
  uint64_t seed = 0;
  DistillConfig loss;
  FeatureExtractorConfig backbone;
};

// Reduced preset for fast single-core runs; the TrainConfig defaults remain
// the full reproduction settings.
TrainConfig desk_scale_config();

void validate_train_config(const TrainConfig& config);

struct TaskLog {
  int task = 0;
  std::vector<double> epoch_mean_loss;
  int adam_steps = 0;
};

struct RunState {
  TrainConfig config;
  Scenario scenario;
  LabelMapper mapper;
  std::optional<ModelState> teacher;
  ModelState student;
  int completed_tasks = 0;
  std::vector<TaskLog> logs;
  std::vector<ModelState> checkpoints;  // student snapshot after each task
};

// Deterministic per-sample evaluation input: fixed subsample to at most
// n_points, then unit-sphere normalization. Keyed by the sample's source_id
// only, so every run scores identical inputs.
PointCloud evaluation_view(const PointCloud& cloud, int n_points);

// Task 0 under plain cross-entropy.
RunState train_base(DatasetProvider& provider, const Scenario& scenario,
                    const TrainConfig& config);

// Freezes the previous student as the teacher, clones it into a new student
// with an expanded head, and trains the next task under the configured
// regime. Only the new task's train split is read.
void advance_task(RunState& state, DatasetProvider& provider);

// Upper-bound reference: a fresh model trained from scratch on the pooled
// train splits of tasks 0..upto with plain cross-entropy. Deliberately reads
// across task fences.
ModelState train_joint(DatasetProvider& provider, const Scenario& scenario,
                       const TrainConfig& config, int upto);

}  // namespace pointclimb
