#include "pointclimb/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

namespace pointclimb {

namespace {

constexpr int kEvalChunk = 32;

int argmax_lowest(const double* row, int m) {
  int best = 0;
  for (int j = 1; j < m; ++j) {
    if (row[j] > row[best]) best = j;
  }
  return best;
}

std::string shortest_double(double v) {
  return nlohmann::json(v).dump();
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

int loss_rank(LossKind kind) {
  switch (kind) {
    case LossKind::Ft: return 0;
    case LossKind::Lwf: return 1;
    case LossKind::Census: return 2;
    case LossKind::Joint: return 3;
  }
  return 4;
}

int backbone_rank(BackboneKind kind) {
  return kind == BackboneKind::PointNetLite ? 0 : 1;
}

}  // namespace

AccuracyRow evaluate_union(const ModelState& model, const DatasetProvider& provider,
                          int upto, int n_points) {
  if (upto < 0 || upto >= provider.num_tasks()) {
    throw std::invalid_argument("evaluation task index out of range");
  }
  std::unordered_map<int, int> slot_of;
  for (int i = 0; i < model.head.num_classes(); ++i) {
    slot_of[model.head.class_slots[static_cast<std::size_t>(i)]] = i;
  }

  ModelTensors frozen = model_constants(model);
  AccuracyRow row;
  row.task = upto;
  long hits_total = 0;
  long count_total = 0;
  for (int j = 0; j <= upto; ++j) {
    const std::vector<PointCloud>& tests = provider.test(j);
    int hits = 0;
    for (std::size_t begin = 0; begin < tests.size(); begin += kEvalChunk) {
      const std::size_t end = std::min(tests.size(), begin + kEvalChunk);
      std::vector<Tensor> clouds;
      clouds.reserve(end - begin);
      for (std::size_t i = begin; i < end; ++i) {
        if (slot_of.find(tests[i].global_class) == slot_of.end()) {
          throw std::logic_error("model head does not cover an evaluated class");
        }
        PointCloud view = evaluation_view(tests[i], n_points);
        clouds.push_back(Tensor({view.num_points(), 3}, view.xyz));
      }
      Tensor logits = model_forward(clouds, model.extractor.config, frozen);
      const int m = logits.dim(1);
      for (std::size_t i = begin; i < end; ++i) {
        const double* scores =
            logits.values().data() + static_cast<std::size_t>(i - begin) * m;
        hits += argmax_lowest(scores, m) == slot_of[tests[i].global_class];
      }
    }
    row.per_task.push_back(static_cast<double>(hits) / tests.size());
    row.per_task_count.push_back(static_cast<int>(tests.size()));
    hits_total += hits;
    count_total += static_cast<long>(tests.size());
  }
  row.union_accuracy = static_cast<double>(hits_total) / count_total;
  return row;
}

std::vector<double> forgetting_measure(const AccuracyMatrix& matrix) {
  if (matrix.rows.empty()) throw std::invalid_argument("empty accuracy matrix");
  const AccuracyRow& last = matrix.rows.back();
  std::vector<double> forgetting;
  for (std::size_t j = 0; j + 1 < last.per_task.size(); ++j) {
    double best = 0.0;
    for (const AccuracyRow& row : matrix.rows) {
      if (j < row.per_task.size()) best = std::max(best, row.per_task[j]);
    }
    forgetting.push_back(best - last.per_task[j]);
  }
  return forgetting;
}

ScenarioRunResult run_scenario(const Dataset& dataset, const Scenario& scenario,
                               const TrainConfig& config) {
  validate_train_config(config);
  DatasetProvider provider(dataset, scenario);
  ScenarioRunResult result;
  const int tasks = scenario.num_tasks();

  if (config.loss.loss_kind == LossKind::Joint) {
    for (int t = 0; t < tasks; ++t) {
      ModelState model = train_joint(provider, scenario, config, t);
      result.matrix.rows.push_back(evaluate_union(model, provider, t, config.n_points));
      result.checkpoints.push_back(model);
      if (t == tasks - 1) result.final_model = std::move(model);
    }
  } else {
    RunState state = train_base(provider, scenario, config);
    result.matrix.rows.push_back(evaluate_union(state.student, provider, 0, config.n_points));
    for (int t = 1; t < tasks; ++t) {
      advance_task(state, provider);
      result.matrix.rows.push_back(evaluate_union(state.student, provider, t, config.n_points));
    }
    result.checkpoints = std::move(state.checkpoints);
    result.logs = std::move(state.logs);
    result.final_model = std::move(state.student);
  }
  result.access_log = provider.train_access_log();
  return result;
}

std::string backbone_label(BackboneKind kind) {
  return kind == BackboneKind::PointNetLite ? "pointnet_lite" : "edgeconv_lite";
}

std::string loss_label(LossKind kind) {
  switch (kind) {
    case LossKind::Joint: return "joint";
    case LossKind::Ft: return "ft";
    case LossKind::Lwf: return "lwf";
    case LossKind::Census: return "census";
  }
  throw std::invalid_argument("unknown loss kind");
}

BackboneKind parse_backbone(const std::string& label) {
  if (label == "pointnet_lite") return BackboneKind::PointNetLite;
  if (label == "edgeconv_lite") return BackboneKind::EdgeConvLite;
  throw std::invalid_argument("unknown backbone '" + label + "'");
}

LossKind parse_loss(const std::string& label) {
  if (label == "joint") return LossKind::Joint;
  if (label == "ft") return LossKind::Ft;
  if (label == "lwf") return LossKind::Lwf;
  if (label == "census") return LossKind::Census;
  throw std::invalid_argument("unknown loss '" + label + "'");
}

nlohmann::ordered_json aggregate_report(const Scenario& scenario,
                                        const std::vector<RunRecord>& records,
                                        const AggregateOptions& options) {
  if (records.empty()) throw std::invalid_argument("no runs to aggregate");
  const std::size_t tasks = records.front().matrix.rows.size();
  for (const RunRecord& record : records) {
    if (record.matrix.rows.size() != tasks) {
      throw std::invalid_argument("runs cover different task counts");
    }
  }

  std::vector<uint64_t> seeds;
  for (const RunRecord& record : records) seeds.push_back(record.seed);
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

  struct Group {
    BackboneKind backbone;
    LossKind loss;
    std::vector<const RunRecord*> members;
  };
  std::vector<Group> groups;
  for (const RunRecord& record : records) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
      return g.backbone == record.backbone && g.loss == record.loss;
    });
    if (it == groups.end()) {
      groups.push_back({record.backbone, record.loss, {&record}});
    } else {
      it->members.push_back(&record);
    }
  }
  std::stable_sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) {
    if (backbone_rank(a.backbone) != backbone_rank(b.backbone)) {
      return backbone_rank(a.backbone) < backbone_rank(b.backbone);
    }
    return loss_rank(a.loss) < loss_rank(b.loss);
  });
  for (Group& group : groups) {
    // seed order fixes the reduction order, so re-aggregation of the same
    // runs is bit-identical no matter how they arrive
    std::stable_sort(group.members.begin(), group.members.end(),
                     [](const RunRecord* a, const RunRecord* b) { return a->seed < b->seed; });
  }

  nlohmann::ordered_json report;
  report["scenario"] = scenario_to_json(scenario);
  report["seeds"] = seeds;
  report["runs"] = nlohmann::ordered_json::array();
  for (const Group& group : groups) {
    nlohmann::ordered_json entry;
    entry["backbone"] = backbone_label(group.backbone);
    entry["loss"] = loss_label(group.loss);
    entry["columns"] = nlohmann::ordered_json::array();
    for (std::size_t t = 0; t < tasks; ++t) {
      double sum = 0.0;
      for (const RunRecord* r : group.members) sum += r->matrix.rows[t].union_accuracy;
      const double n = static_cast<double>(group.members.size());
      const double mean = sum / n;
      double sq = 0.0;
      for (const RunRecord* r : group.members) {
        const double d = r->matrix.rows[t].union_accuracy - mean;
        sq += d * d;
      }
      const double divisor = options.sample_std && group.members.size() > 1 ? n - 1.0 : n;
      nlohmann::ordered_json cell;
      cell["task"] = t;
      cell["mean"] = mean;
      cell["std"] = std::sqrt(sq / divisor);
      entry["columns"].push_back(cell);
    }
    report["runs"].push_back(entry);
  }
  return report;
}

std::string report_csv(const nlohmann::ordered_json& report) {
  const auto& runs = report.at("runs");
  std::size_t tasks = runs.empty() ? 0 : runs.front().at("columns").size();
  std::string csv = "backbone,loss";
  for (std::size_t t = 0; t < tasks; ++t) {
    csv += ",task" + std::to_string(t) + "_mean,task" + std::to_string(t) + "_std";
  }
  csv += "\n";
  for (const auto& run : runs) {
    csv += run.at("backbone").get<std::string>() + "," + run.at("loss").get<std::string>();
    for (const auto& cell : run.at("columns")) {
      csv += "," + shortest_double(cell.at("mean").get<double>());
      csv += "," + shortest_double(cell.at("std").get<double>());
    }
    csv += "\n";
  }
  return csv;
}

std::string report_table(const nlohmann::ordered_json& report) {
  const auto& runs = report.at("runs");
  const auto& sizes = report.at("scenario").at("sizes");
  const std::size_t tasks = runs.empty() ? 0 : runs.front().at("columns").size();

  std::vector<int> cumulative;
  int total = 0;
  for (const auto& s : sizes) {
    total += s.get<int>();
    cumulative.push_back(total);
  }

  // per column: best and second-best mean
  std::vector<double> best(tasks, -1.0), second(tasks, -1.0);
  for (const auto& run : runs) {
    std::size_t t = 0;
    for (const auto& cell : run.at("columns")) {
      const double mean = cell.at("mean").get<double>();
      if (mean > best[t]) {
        second[t] = best[t];
        best[t] = mean;
      } else if (mean < best[t] && mean > second[t]) {
        second[t] = mean;
      }
      ++t;
    }
  }

  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header = {"backbone", "loss"};
  for (std::size_t t = 0; t < tasks; ++t) {
    header.push_back(t < cumulative.size() ? std::to_string(cumulative[t])
                                           : "task" + std::to_string(t));
  }
  grid.push_back(header);
  for (const auto& run : runs) {
    std::vector<std::string> line = {run.at("backbone").get<std::string>(),
                                     run.at("loss").get<std::string>()};
    std::size_t t = 0;
    for (const auto& cell : run.at("columns")) {
      const double mean = cell.at("mean").get<double>();
      const double sd = cell.at("std").get<double>();
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.2f+-%.2f", mean * 100.0, sd * 100.0);
      std::string text = buf;
      if (mean == best[t]) {
        text += " *";
      } else if (mean == second[t]) {
        text += " +";
      }
      line.push_back(text);
      ++t;
    }
    grid.push_back(line);
  }

  std::vector<std::size_t> width(grid.front().size(), 0);
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      width[c] = std::max(width[c], line[c].size());
    }
  }
  std::string table = "columns: classes seen so far; * best mean, + second best\n";
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      table += line[c];
      if (c + 1 < line.size()) {
        table.append(width[c] - line[c].size() + 2, ' ');
      }
    }
    table += "\n";
  }
  return table;
}

void write_report_files(const std::string& dir, const nlohmann::ordered_json& report) {
  std::filesystem::create_directories(dir);
  std::filesystem::path base(dir);
  atomic_write(base / "results.json", report.dump(2) + "\n");
  atomic_write(base / "results.csv", report_csv(report));
  atomic_write(base / "table.txt", report_table(report));
}

nlohmann::ordered_json matrix_to_json(const AccuracyMatrix& matrix) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const AccuracyRow& row : matrix.rows) {
    nlohmann::ordered_json item;
    item["task"] = row.task;
    item["union_accuracy"] = row.union_accuracy;
    item["per_task"] = row.per_task;
    item["per_task_count"] = row.per_task_count;
    rows.push_back(item);
  }
  return nlohmann::ordered_json{{"rows", rows}};
}

AccuracyMatrix matrix_from_json(const nlohmann::json& j) {
  AccuracyMatrix matrix;
  for (const auto& item : j.at("rows")) {
    AccuracyRow row;
    row.task = item.at("task").get<int>();
    row.union_accuracy = item.at("union_accuracy").get<double>();
    row.per_task = item.at("per_task").get<std::vector<double>>();
    row.per_task_count = item.at("per_task_count").get<std::vector<int>>();
    if (row.per_task.size() != row.per_task_count.size()) {
      throw std::invalid_argument("accuracy row breakdown lengths differ");
    }
    matrix.rows.push_back(std::move(row));
  }
  return matrix;
}

void atomic_write_file(const std::string& path, const std::string& content) {
  atomic_write(std::filesystem::path(path), content);
}

}  // namespace pointclimb
