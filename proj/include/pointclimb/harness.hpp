#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "pointclimb/trainer.hpp"

namespace pointclimb {

// Union evaluation after training task `task`: micro-averaged top-1 over the
// test sets of tasks 0..task, with the per-task breakdown kept alongside.
struct AccuracyRow {
  int task = 0;
  double union_accuracy = 0.0;
  std::vector<double> per_task;     // accuracy on task j's test classes
  std::vector<int> per_task_count;  // test samples per task (weights)
};

struct AccuracyMatrix {
  std::vector<AccuracyRow> rows;
};

// Argmax over all head columns, ties to the lowest index.
AccuracyRow evaluate_union(const ModelState& model, const DatasetProvider& provider,
                          int upto, int n_points);

// f[j] = max over rows of per-task accuracy on j, minus the final row's.
// One value per non-final task; empty for a single-task matrix.
std::vector<double> forgetting_measure(const AccuracyMatrix& matrix);

// One full scenario run under config.loss.loss_kind. The incremental
// regimes train base + advance; the joint bound retrains from scratch at
// every evaluation point.
struct ScenarioRunResult {
  AccuracyMatrix matrix;
  ModelState final_model;
  std::vector<ModelState> checkpoints;
  std::vector<TaskLog> logs;  // empty for the joint bound
  std::vector<DatasetProvider::Access> access_log;
};

ScenarioRunResult run_scenario(const Dataset& dataset, const Scenario& scenario,
                               const TrainConfig& config);

std::string backbone_label(BackboneKind kind);
std::string loss_label(LossKind kind);
BackboneKind parse_backbone(const std::string& label);
LossKind parse_loss(const std::string& label);

struct RunRecord {
  BackboneKind backbone = BackboneKind::PointNetLite;
  LossKind loss = LossKind::Ft;
  uint64_t seed = 0;
  AccuracyMatrix matrix;
};

struct AggregateOptions {
  bool sample_std = false;  // population std by default
};

// Groups records by (backbone, loss) and reduces over seeds to per-task
// mean and std of union accuracy.
nlohmann::ordered_json aggregate_report(const Scenario& scenario,
                                        const std::vector<RunRecord>& records,
                                        const AggregateOptions& options = {});

std::string report_csv(const nlohmann::ordered_json& report);

// Aligned text table; per column the best mean is marked '*' and the second
// best '+'.
std::string report_table(const nlohmann::ordered_json& report);

// results.json, results.csv, table.txt under dir (created if missing); each
// file lands via rename so readers never see partial content.
void write_report_files(const std::string& dir, const nlohmann::ordered_json& report);

nlohmann::ordered_json matrix_to_json(const AccuracyMatrix& matrix);
AccuracyMatrix matrix_from_json(const nlohmann::json& j);

// Writes content to a sibling temp file and renames it into place.
void atomic_write_file(const std::string& path, const std::string& content);

}  // namespace pointclimb
