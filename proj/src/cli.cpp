#include "pointclimb/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>

#include "CLI11.hpp"

namespace pointclimb {

const char* const kDatasetRootEnv = "POINTCLIMB_DATASET_ROOT";

namespace {

namespace fs = std::filesystem;

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                    const char* where) {
  if (!j.is_object()) {
    throw std::invalid_argument(std::string(where) + " section must be a JSON object");
  }
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) known |= item.key() == key;
    if (!known) {
      throw std::invalid_argument("unknown key '" + item.key() + "' in " + where);
    }
  }
}

std::string aggregation_label(Aggregation aggregation) {
  switch (aggregation) {
    case Aggregation::Max: return "max";
    case Aggregation::Mean: return "mean";
    case Aggregation::Sum: return "sum";
  }
  throw std::invalid_argument("unknown aggregation");
}

Aggregation parse_aggregation(const std::string& label) {
  if (label == "max") return Aggregation::Max;
  if (label == "mean") return Aggregation::Mean;
  if (label == "sum") return Aggregation::Sum;
  throw std::invalid_argument("unknown aggregation '" + label + "'");
}

std::string resolved_dataset_path(const ExperimentConfig& config) {
  const char* env = std::getenv(kDatasetRootEnv);
  if (env != nullptr && *env != '\0') return env;
  return config.dataset_path;
}

int dataset_class_count(const ExperimentConfig& config) {
  return config.dataset_kind == "synthetic" ? config.synthetic_classes : 40;
}

std::string run_name(BackboneKind backbone, LossKind loss, uint64_t seed) {
  return backbone_label(backbone) + "-" + loss_label(loss) + "-seed" + std::to_string(seed);
}

void write_run_bundle(const std::string& output_dir, const std::string& name,
                      const nlohmann::ordered_json& canonical_config,
                      const Scenario& scenario, BackboneKind backbone, LossKind loss,
                      uint64_t seed, const ScenarioRunResult& result) {
  fs::path dir = fs::path(output_dir) / "runs" / name;
  fs::create_directories(dir);

  nlohmann::ordered_json manifest;
  manifest["backbone"] = backbone_label(backbone);
  manifest["loss"] = loss_label(loss);
  manifest["seed"] = seed;
  manifest["config"] = canonical_config;
  manifest["scenario"] = scenario_to_json(scenario);
  manifest["matrix"] = matrix_to_json(result.matrix);
  manifest["forgetting"] = forgetting_measure(result.matrix);
  nlohmann::ordered_json losses = nlohmann::ordered_json::array();
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const TaskLog& log : result.logs) {
    losses.push_back(log.epoch_mean_loss);
    steps.push_back(log.adam_steps);
  }
  manifest["epoch_loss"] = losses;
  manifest["adam_steps"] = steps;
  nlohmann::ordered_json accesses = nlohmann::ordered_json::array();
  for (const DatasetProvider::Access& access : result.access_log) {
    accesses.push_back({{"task", access.task}, {"joint", access.joint_mode}});
  }
  manifest["access_log"] = accesses;
  manifest["final_checksum"] = state_checksum(result.final_model);

  atomic_write_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
  for (std::size_t t = 0; t < result.checkpoints.size(); ++t) {
    atomic_write_file((dir / ("checkpoint_task" + std::to_string(t) + ".json")).string(),
                      model_to_json(result.checkpoints[t]).dump() + "\n");
  }
}

template <typename T>
void get_if_present(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig config;
  reject_unknown(j,
                 {"dataset", "scenario", "backbones", "losses", "seeds", "train",
                  "output_dir", "workers", "sample_std"},
                 "config");

  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    reject_unknown(d, {"kind", "path", "classes", "samples_per_class", "points", "seed"},
                   "dataset");
    get_if_present(d, "kind", config.dataset_kind);
    get_if_present(d, "path", config.dataset_path);
    get_if_present(d, "classes", config.synthetic_classes);
    get_if_present(d, "samples_per_class", config.synthetic_samples_per_class);
    get_if_present(d, "points", config.synthetic_points);
    get_if_present(d, "seed", config.synthetic_seed);
  }
  if (j.contains("scenario")) {
    const auto& s = j.at("scenario");
    reject_unknown(s, {"kind", "sizes", "tc", "low", "high", "seed"}, "scenario");
    get_if_present(s, "kind", config.scenario_kind);
    get_if_present(s, "sizes", config.scenario_sizes);
    get_if_present(s, "tc", config.veristic_tc);
    get_if_present(s, "low", config.veristic_low);
    get_if_present(s, "high", config.veristic_high);
    get_if_present(s, "seed", config.scenario_seed);
  }
  get_if_present(j, "backbones", config.backbones);
  get_if_present(j, "losses", config.losses);
  get_if_present(j, "seeds", config.seeds);
  if (j.contains("train")) {
    const auto& t = j.at("train");
    reject_unknown(t,
                   {"epochs", "batch_size", "lr", "n_points", "widths", "aggregation",
                    "k_neighbors", "tau", "lambda_lwf", "eta_cumulative", "t_current_index"},
                   "train");
    get_if_present(t, "epochs", config.train.epochs);
    get_if_present(t, "batch_size", config.train.batch_size);
    get_if_present(t, "lr", config.train.lr);
    get_if_present(t, "n_points", config.train.n_points);
    get_if_present(t, "widths", config.train.backbone.widths);
    if (t.contains("aggregation")) {
      config.train.backbone.aggregation =
          parse_aggregation(t.at("aggregation").get<std::string>());
    }
    get_if_present(t, "k_neighbors", config.train.backbone.k_neighbors);
    get_if_present(t, "tau", config.train.loss.tau);
    get_if_present(t, "lambda_lwf", config.train.loss.lambda_lwf);
    get_if_present(t, "eta_cumulative", config.train.loss.eta_cumulative);
    get_if_present(t, "t_current_index", config.train.loss.t_current_index);
  }
  get_if_present(j, "output_dir", config.output_dir);
  get_if_present(j, "workers", config.workers);
  get_if_present(j, "sample_std", config.sample_std);
  return config;
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& config) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json dataset;
  dataset["kind"] = config.dataset_kind;
  dataset["path"] = config.dataset_path;
  dataset["classes"] = config.synthetic_classes;
  dataset["samples_per_class"] = config.synthetic_samples_per_class;
  dataset["points"] = config.synthetic_points;
  dataset["seed"] = config.synthetic_seed;
  j["dataset"] = dataset;

  nlohmann::ordered_json scenario;
  scenario["kind"] = config.scenario_kind;
  scenario["sizes"] = config.scenario_sizes;
  scenario["tc"] = config.veristic_tc;
  scenario["low"] = config.veristic_low;
  scenario["high"] = config.veristic_high;
  scenario["seed"] = config.scenario_seed;
  j["scenario"] = scenario;

  j["backbones"] = config.backbones;
  j["losses"] = config.losses;
  j["seeds"] = config.seeds;

  nlohmann::ordered_json train;
  train["epochs"] = config.train.epochs;
  train["batch_size"] = config.train.batch_size;
  train["lr"] = config.train.lr;
  train["n_points"] = config.train.n_points;
  train["widths"] = config.train.backbone.widths;
  train["aggregation"] = aggregation_label(config.train.backbone.aggregation);
  train["k_neighbors"] = config.train.backbone.k_neighbors;
  train["tau"] = config.train.loss.tau;
  train["lambda_lwf"] = config.train.loss.lambda_lwf;
  train["eta_cumulative"] = config.train.loss.eta_cumulative;
  train["t_current_index"] = config.train.loss.t_current_index;
  j["train"] = train;

  j["output_dir"] = config.output_dir;
  j["workers"] = config.workers;
  j["sample_std"] = config.sample_std;
  return j;
}

void validate_experiment(const ExperimentConfig& config) {
  if (config.dataset_kind != "synthetic" && config.dataset_kind != "modelnet40") {
    throw std::invalid_argument("dataset kind must be synthetic or modelnet40");
  }
  if (config.dataset_kind == "synthetic") {
    if (config.synthetic_classes < 1 || config.synthetic_classes > 20) {
      throw std::invalid_argument("synthetic classes must be in 1..20");
    }
    if (config.synthetic_samples_per_class < 2) {
      throw std::invalid_argument("synthetic samples_per_class must be at least 2");
    }
    if (config.synthetic_points < 1) {
      throw std::invalid_argument("synthetic points must be positive");
    }
  } else {
    if (!hdf5_available()) {
      throw std::invalid_argument("modelnet40 needs hdf5 support, which is not compiled in");
    }
    const std::string path = resolved_dataset_path(config);
    if (path.empty() || !fs::exists(path)) {
      throw std::invalid_argument("modelnet40 path '" + path + "' does not exist");
    }
  }

  const int classes = dataset_class_count(config);
  if (config.scenario_kind == "fixed") {
    if (config.scenario_sizes.empty()) {
      throw std::invalid_argument("fixed scenario needs task sizes");
    }
    int total = 0;
    for (int s : config.scenario_sizes) {
      if (s < 1) throw std::invalid_argument("task sizes must be positive");
      total += s;
    }
    if (total > classes) {
      throw std::invalid_argument("scenario sizes exceed the dataset's class count");
    }
  } else if (config.scenario_kind == "veristic") {
    if (config.veristic_tc > classes) {
      throw std::invalid_argument("scenario tc exceeds the dataset's class count");
    }
    if (!(1 <= config.veristic_low && config.veristic_low <= config.veristic_high &&
          config.veristic_high <= config.veristic_tc)) {
      throw std::invalid_argument("scenario requires 1 <= low <= high <= tc");
    }
  } else {
    throw std::invalid_argument("scenario kind must be fixed or veristic");
  }

  if (config.backbones.empty()) throw std::invalid_argument("backbones list is empty");
  if (config.losses.empty()) throw std::invalid_argument("losses list is empty");
  if (config.seeds.empty()) throw std::invalid_argument("seeds list is empty");
  for (const std::string& label : config.backbones) parse_backbone(label);
  for (const std::string& label : config.losses) parse_loss(label);
  auto has_duplicates = [](auto list) {
    std::sort(list.begin(), list.end());
    return std::adjacent_find(list.begin(), list.end()) != list.end();
  };
  if (has_duplicates(config.backbones)) throw std::invalid_argument("duplicate backbone");
  if (has_duplicates(config.losses)) throw std::invalid_argument("duplicate loss");
  if (has_duplicates(config.seeds)) throw std::invalid_argument("duplicate seed");

  validate_train_config(config.train);
  if (config.workers < 1) throw std::invalid_argument("workers must be positive");
  if (config.output_dir.empty()) throw std::invalid_argument("output_dir is empty");
}

Dataset load_experiment_dataset(const ExperimentConfig& config) {
  if (config.dataset_kind == "synthetic") {
    return generate_synthetic_classes(config.synthetic_classes,
                                      config.synthetic_samples_per_class,
                                      config.synthetic_points, config.synthetic_seed);
  }
  Dataset dataset;
  dataset.num_classes = 40;
  const std::string path = resolved_dataset_path(config);
  dataset.train = load_h5_split(path, "train");
  dataset.test = load_h5_split(path, "test");
  return dataset;
}

Scenario make_experiment_scenario(const ExperimentConfig& config) {
  if (config.scenario_kind == "fixed") {
    return fixed_scenario(dataset_class_count(config), config.scenario_sizes,
                          config.scenario_seed);
  }
  SamplerConfig sampler;
  sampler.tc = config.veristic_tc;
  sampler.low = config.veristic_low;
  sampler.high = config.veristic_high;
  sampler.seed = config.scenario_seed;
  return build_scenario(sampler);
}

int run_experiment(const ExperimentConfig& config, std::ostream& log) {
  validate_experiment(config);
  const nlohmann::ordered_json canonical = config_to_json(config);
  log << "loading " << config.dataset_kind << " dataset\n";
  const Dataset dataset = load_experiment_dataset(config);
  const Scenario scenario = make_experiment_scenario(config);
  log << "scenario: " << scenario.num_tasks() << " tasks over "
      << scenario.total_classes() << " classes\n";

  struct Job {
    BackboneKind backbone;
    LossKind loss;
    uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const std::string& b : config.backbones) {
    for (const std::string& l : config.losses) {
      for (uint64_t s : config.seeds) {
        jobs.push_back({parse_backbone(b), parse_loss(l), s});
      }
    }
  }

  std::vector<std::optional<RunRecord>> slots(jobs.size());
  std::vector<std::string> failures;
  std::mutex mu;
  std::atomic<std::size_t> cursor{0};

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= jobs.size()) break;
      const Job& job = jobs[i];
      const std::string name = run_name(job.backbone, job.loss, job.seed);
      try {
        TrainConfig train = config.train;
        train.seed = job.seed;
        train.backbone.kind = job.backbone;
        train.loss.loss_kind = job.loss;
        ScenarioRunResult result = run_scenario(dataset, scenario, train);
        write_run_bundle(config.output_dir, name, canonical, scenario, job.backbone,
                         job.loss, job.seed, result);
        const double final_acc = result.matrix.rows.back().union_accuracy;
        std::lock_guard<std::mutex> lock(mu);
        slots[i] = RunRecord{job.backbone, job.loss, job.seed, std::move(result.matrix)};
        log << "run " << name << " done, final union accuracy " << final_acc << "\n";
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(mu);
        failures.push_back(name + ": " + e.what());
        log << "run " << name << " FAILED: " << e.what() << "\n";
      }
    }
  };

  const int worker_count =
      static_cast<int>(std::min<std::size_t>(config.workers, jobs.size()));
  if (worker_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < worker_count; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  std::vector<RunRecord> records;
  for (auto& slot : slots) {
    if (slot.has_value()) records.push_back(std::move(*slot));
  }
  if (!records.empty()) {
    AggregateOptions options;
    options.sample_std = config.sample_std;
    write_report_files(config.output_dir, aggregate_report(scenario, records, options));
    log << "report written under " << config.output_dir << "\n";
  }
  if (!failures.empty()) {
    log << failures.size() << " of " << jobs.size() << " runs failed\n";
    return 1;
  }
  return 0;
}

namespace {

std::vector<fs::path> manifest_paths(const std::string& dir) {
  fs::path runs = fs::path(dir) / "runs";
  if (!fs::is_directory(runs)) {
    throw std::invalid_argument("no runs directory under " + dir);
  }
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(runs)) {
    fs::path manifest = entry.path() / "manifest.json";
    if (entry.is_directory() && fs::exists(manifest)) paths.push_back(manifest);
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw std::invalid_argument("no run manifests under " + dir);
  return paths;
}

nlohmann::json parse_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read " + path.string());
  return nlohmann::json::parse(in);
}

}  // namespace

int report_runs(const std::string& dir, bool sample_std, std::ostream& log) {
  std::vector<RunRecord> records;
  nlohmann::json scenario_json;
  for (const fs::path& path : manifest_paths(dir)) {
    nlohmann::json manifest = parse_file(path);
    if (scenario_json.is_null()) {
      scenario_json = manifest.at("scenario");
    } else if (scenario_json != manifest.at("scenario")) {
      throw std::invalid_argument("run manifests disagree on the scenario");
    }
    RunRecord record;
    record.backbone = parse_backbone(manifest.at("backbone").get<std::string>());
    record.loss = parse_loss(manifest.at("loss").get<std::string>());
    record.seed = manifest.at("seed").get<uint64_t>();
    record.matrix = matrix_from_json(manifest.at("matrix"));
    records.push_back(std::move(record));
  }

  AggregateOptions options;
  options.sample_std = sample_std;
  write_report_files(dir,
                     aggregate_report(scenario_from_json(scenario_json), records, options));
  log << "aggregated " << records.size() << " runs under " << dir << "\n";
  return 0;
}

int verify_bundle(const std::string& dir, std::ostream& log) {
  int failed = 0;
  auto check = [&](const std::string& name, bool ok) {
    log << (ok ? "ok   " : "FAIL ") << name << "\n";
    failed += !ok;
    return ok;
  };

  nlohmann::json report = parse_file(fs::path(dir) / "results.json");
  if (!check("results.json holds scenario, seeds and runs",
             report.contains("scenario") && report.contains("seeds") &&
                 report.contains("runs"))) {
    return 1;
  }
  Scenario scenario = scenario_from_json(report.at("scenario"));

  bool bounds_ok = true;
  for (const auto& run : report.at("runs")) {
    for (const auto& cell : run.at("columns")) {
      const double mean = cell.at("mean").get<double>();
      const double sd = cell.at("std").get<double>();
      bounds_ok &= mean >= 0.0 && mean <= 1.0 && sd >= 0.0;
    }
  }
  check("means lie in [0,1] and stds are non-negative", bounds_ok);

  std::vector<uint64_t> seeds = report.at("seeds").get<std::vector<uint64_t>>();
  check("seed list is non-empty, sorted and unique",
        !seeds.empty() && std::is_sorted(seeds.begin(), seeds.end()) &&
            std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());

  std::vector<RunRecord> records;
  bool scenario_ok = true, arithmetic_ok = true, audit_ok = true, forgetting_ok = true;
  for (const fs::path& path : manifest_paths(dir)) {
    nlohmann::json manifest = parse_file(path);
    scenario_ok &= manifest.at("scenario") == report.at("scenario");

    AccuracyMatrix matrix = matrix_from_json(manifest.at("matrix"));
    arithmetic_ok &= static_cast<int>(matrix.rows.size()) == scenario.num_tasks();
    for (std::size_t t = 0; t < matrix.rows.size(); ++t) {
      const AccuracyRow& row = matrix.rows[t];
      arithmetic_ok &= row.task == static_cast<int>(t);
      arithmetic_ok &= row.per_task.size() == t + 1;
      double weighted = 0.0;
      long total = 0;
      for (std::size_t j = 0; j < row.per_task.size(); ++j) {
        arithmetic_ok &= row.per_task[j] >= 0.0 && row.per_task[j] <= 1.0;
        weighted += row.per_task[j] * row.per_task_count[j];
        total += row.per_task_count[j];
      }
      arithmetic_ok &=
          total > 0 && std::abs(row.union_accuracy - weighted / total) <= 1e-9;
    }

    const bool joint = manifest.at("loss").get<std::string>() == "joint";
    int previous = -1;
    for (const auto& access : manifest.at("access_log")) {
      const bool joint_access = access.at("joint").get<bool>();
      const int task = access.at("task").get<int>();
      if (joint) continue;
      audit_ok &= !joint_access;
      audit_ok &= task > previous;  // strictly forward: no prior-task reads
      previous = task;
    }

    std::vector<double> forgetting =
        manifest.at("forgetting").get<std::vector<double>>();
    std::vector<double> recomputed = forgetting_measure(matrix);
    forgetting_ok &= forgetting.size() == recomputed.size();
    for (std::size_t j = 0; forgetting_ok && j < forgetting.size(); ++j) {
      forgetting_ok &= std::abs(forgetting[j] - recomputed[j]) <= 1e-12;
    }

    RunRecord record;
    record.backbone = parse_backbone(manifest.at("backbone").get<std::string>());
    record.loss = parse_loss(manifest.at("loss").get<std::string>());
    record.seed = manifest.at("seed").get<uint64_t>();
    record.matrix = std::move(matrix);
    records.push_back(std::move(record));
  }
  check("manifests agree with the report's scenario", scenario_ok);
  check("union accuracy equals the weighted per-task breakdown", arithmetic_ok);
  check("incremental runs read no prior-task train data", audit_ok);
  check("stored forgetting matches a recomputation", forgetting_ok);

  AggregateOptions population, sample;
  sample.sample_std = true;
  const nlohmann::json from_population =
      nlohmann::json::parse(aggregate_report(scenario, records, population).dump());
  const nlohmann::json from_sample =
      nlohmann::json::parse(aggregate_report(scenario, records, sample).dump());
  check("aggregating the manifests reproduces results.json",
        report == from_population || report == from_sample);

  return failed == 0 ? 0 : 1;
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"exemplar-free class-incremental benchmark for 3d point clouds"};
  app.require_subcommand(1);

  int tc = 40, low = 3, high = 8;
  uint64_t sample_seed = 0;
  std::string sample_out = "scenario.json";
  CLI::App* sample = app.add_subcommand("sample", "draw a task scenario");
  sample->add_option("--tc", tc, "total class count")->required();
  sample->add_option("--low", low, "smallest drawable task size")->required();
  sample->add_option("--high", high, "largest drawable task size")->required();
  sample->add_option("--seed", sample_seed, "sampler seed");
  sample->add_option("--out", sample_out, "output scenario file");

  std::string config_path;
  std::string output_override;
  std::vector<std::string> backbones_override, losses_override;
  std::vector<uint64_t> seeds_override;
  int epochs_override = 0, batch_override = 0, points_override = 0, workers_override = 0;
  double lr_override = 0.0;
  CLI::App* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("--config", config_path, "experiment config JSON")->required();
  CLI::Option* opt_output = run->add_option("--output", output_override, "output directory");
  CLI::Option* opt_backbones =
      run->add_option("--backbones", backbones_override, "backbone labels");
  CLI::Option* opt_losses = run->add_option("--losses", losses_override, "loss labels");
  CLI::Option* opt_seeds = run->add_option("--seeds", seeds_override, "run seeds");
  CLI::Option* opt_epochs = run->add_option("--epochs", epochs_override, "epochs per task");
  CLI::Option* opt_batch = run->add_option("--batch-size", batch_override, "batch size");
  CLI::Option* opt_points = run->add_option("--n-points", points_override, "points per cloud");
  CLI::Option* opt_lr = run->add_option("--lr", lr_override, "learning rate");
  CLI::Option* opt_workers = run->add_option("--workers", workers_override, "parallel runs");

  std::string report_dir;
  bool report_sample_std = false;
  CLI::App* report = app.add_subcommand("report", "re-aggregate an output directory");
  report->add_option("--dir", report_dir, "output directory of a previous run")->required();
  report->add_flag("--sample-std", report_sample_std, "sample instead of population std");

  std::string verify_dir;
  CLI::App* verify = app.add_subcommand("verify", "check a results bundle's invariants");
  verify->add_option("--dir", verify_dir, "output directory of a previous run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sample->parsed()) {
      SamplerConfig sampler;
      sampler.tc = tc;
      sampler.low = low;
      sampler.high = high;
      sampler.seed = sample_seed;
      Scenario scenario = build_scenario(sampler);
      atomic_write_file(sample_out, scenario_to_json(scenario).dump(2) + "\n");
      std::cout << "wrote " << sample_out << " with " << scenario.num_tasks()
                << " tasks: " << nlohmann::json(scenario.sizes()).dump() << "\n";
      return 0;
    }
    if (run->parsed()) {
      std::ifstream in(config_path);
      if (!in) throw std::invalid_argument("cannot read config " + config_path);
      ExperimentConfig config = config_from_json(nlohmann::json::parse(in));
      if (opt_output->count() > 0) config.output_dir = output_override;
      if (opt_backbones->count() > 0) config.backbones = backbones_override;
      if (opt_losses->count() > 0) config.losses = losses_override;
      if (opt_seeds->count() > 0) config.seeds = seeds_override;
      if (opt_epochs->count() > 0) config.train.epochs = epochs_override;
      if (opt_batch->count() > 0) config.train.batch_size = batch_override;
      if (opt_points->count() > 0) config.train.n_points = points_override;
      if (opt_lr->count() > 0) config.train.lr = lr_override;
      if (opt_workers->count() > 0) config.workers = workers_override;
      return run_experiment(config, std::cout);
    }
    if (report->parsed()) return report_runs(report_dir, report_sample_std, std::cout);
    return verify_bundle(verify_dir, std::cout);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace pointclimb
