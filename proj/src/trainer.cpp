#include "pointclimb/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "pointclimb/rng.hpp"

namespace pointclimb {

namespace {

PointCloud subsampled_view(const PointCloud& cloud, int n_points, Rng& rng) {
  PointCloud view;
  view.global_class = cloud.global_class;
  view.source_id = cloud.source_id;
  const int n = cloud.num_points();
  if (n <= n_points) {
    view.xyz = cloud.xyz;
  } else {
    std::vector<int> picks = rng.sample_without_replacement(n, n_points);
    view.xyz.reserve(static_cast<std::size_t>(n_points) * 3);
    for (int i : picks) {
      view.xyz.push_back(cloud.xyz[static_cast<std::size_t>(i) * 3]);
      view.xyz.push_back(cloud.xyz[static_cast<std::size_t>(i) * 3 + 1]);
      view.xyz.push_back(cloud.xyz[static_cast<std::size_t>(i) * 3 + 2]);
    }
  }
  view.xyz = normalize_unit_sphere(std::move(view.xyz));
  return view;
}

Tensor cloud_tensor(const PointCloud& view) {
  return Tensor({view.num_points(), 3}, view.xyz);
}

struct FitResult {
  std::vector<double> epoch_mean_loss;
  int adam_steps = 0;
};

// One task's optimization loop. teacher == nullptr means plain
// cross-entropy (base and joint runs); otherwise the regime in
// config.loss.loss_kind decides the objective. The teacher sees the same
// subsampled views as the student and stays off the tape.
FitResult fit(ModelState& student, const ModelState* teacher, const LabelMapper& mapper,
              const std::vector<PointCloud>& data, const TrainConfig& config,
              int task_index, const CensusContext* census) {
  if (data.empty()) throw std::invalid_argument("training split is empty");

  AdamConfig adam_config;
  adam_config.lr = config.lr;
  Adam adam(student.params(), adam_config);

  const int n = static_cast<int>(data.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  FitResult result;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng shuffle_rng(mix(mix(mix(config.seed, "train/shuffle"), static_cast<uint64_t>(task_index)),
                        static_cast<uint64_t>(epoch)));
    shuffle_rng.shuffle(order);
    Rng point_rng(mix(mix(mix(config.seed, "train/points"), static_cast<uint64_t>(task_index)),
                      static_cast<uint64_t>(epoch)));

    double loss_sum = 0.0;
    for (int begin = 0; begin < n; begin += config.batch_size) {
      const int end = std::min(n, begin + config.batch_size);
      std::vector<Tensor> clouds;
      std::vector<int> labels;
      clouds.reserve(static_cast<std::size_t>(end - begin));
      labels.reserve(static_cast<std::size_t>(end - begin));
      for (int i = begin; i < end; ++i) {
        const PointCloud& sample = data[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
        clouds.push_back(cloud_tensor(subsampled_view(sample, config.n_points, point_rng)));
        labels.push_back(mapper.logit(sample.global_class));
      }

      Tape tape;
      ModelTensors watched = watch_model(tape, student);
      Tensor logits = model_forward(clouds, student.extractor.config, watched);
      Tensor loss = [&]() -> Tensor {
        if (teacher == nullptr || config.loss.loss_kind == LossKind::Ft) {
          return class_loss(logits, labels);
        }
        ModelTensors frozen = model_constants(*teacher);
        Tensor teacher_logits = model_forward(clouds, teacher->extractor.config, frozen);
        if (config.loss.loss_kind == LossKind::Lwf) {
          return lwf_loss(teacher_logits, logits, labels, config.loss);
        }
        return census_loss(teacher_logits, logits, labels, config.loss, *census);
      }();

      loss_sum += loss.scalar_value() * (end - begin);
      tape.backward(loss);
      adam.step();
      ++result.adam_steps;
    }
    result.epoch_mean_loss.push_back(loss_sum / n);
  }
  return result;
}

void check_slots(const ModelState& model, const LabelMapper& mapper) {
  if (model.head.class_slots != mapper.slots()) {
    throw std::logic_error("head columns out of step with the label mapper");
  }
}

}  // namespace

TrainConfig desk_scale_config() {
  TrainConfig config;
  config.epochs = 10;
  config.batch_size = 16;
  config.lr = 5e-3;
  config.n_points = 128;
  config.backbone.widths = {32, 64, 128};
  return config;
}

void validate_train_config(const TrainConfig& config) {
  if (config.epochs < 0) throw std::invalid_argument("epochs must be non-negative");
  if (config.batch_size < 1) throw std::invalid_argument("batch_size must be positive");
  if (!(config.lr > 0.0)) throw std::invalid_argument("lr must be positive");
  if (config.n_points < 1) throw std::invalid_argument("n_points must be positive");
  if (!(config.loss.tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (config.loss.lambda_lwf < 0.0) {
    throw std::invalid_argument("lwf lambda must be non-negative");
  }
  if (config.backbone.widths.empty()) {
    throw std::invalid_argument("backbone needs at least one layer");
  }
}

PointCloud evaluation_view(const PointCloud& cloud, int n_points) {
  Rng rng(mix(mix(0, "eval/points"), cloud.source_id));
  return subsampled_view(cloud, n_points, rng);
}

RunState train_base(DatasetProvider& provider, const Scenario& scenario,
                    const TrainConfig& config) {
  validate_train_config(config);
  if (scenario.num_tasks() < 1) throw std::invalid_argument("scenario has no tasks");

  RunState state;
  state.config = config;
  state.scenario = scenario;
  state.mapper.extend(scenario.tasks[0]);
  state.student = make_model(config.backbone, scenario.tasks[0], config.seed);
  check_slots(state.student, state.mapper);

  provider.begin_task(0);
  FitResult log = fit(state.student, nullptr, state.mapper, provider.train(0), config, 0, nullptr);
  state.logs.push_back({0, std::move(log.epoch_mean_loss), log.adam_steps});
  state.completed_tasks = 1;
  state.checkpoints.push_back(state.student);
  return state;
}

void advance_task(RunState& state, DatasetProvider& provider) {
  const TrainConfig& config = state.config;
  if (config.loss.loss_kind == LossKind::Joint) {
    throw std::invalid_argument("the joint bound retrains from scratch; use train_joint");
  }
  const int t = state.completed_tasks;
  if (t < 1) throw std::logic_error("advance_task needs a completed base task");
  if (t >= state.scenario.num_tasks()) {
    throw std::invalid_argument("scenario has no further task");
  }

  const std::vector<int>& classes = state.scenario.tasks[static_cast<std::size_t>(t)];
  const std::vector<int>& seen = state.mapper.slots();
  for (int c : classes) {
    if (std::find(seen.begin(), seen.end(), c) != seen.end()) {
      throw std::invalid_argument("task classes overlap previously seen classes");
    }
  }

  ModelState teacher = std::move(state.student);
  teacher.role = ModelState::Role::Teacher;
  teacher.frozen = true;

  ModelState student = teacher;
  student.role = ModelState::Role::Student;
  student.frozen = false;
  student.head = expand_head(student.head, classes, config.seed);

  state.mapper.extend(classes);
  check_slots(student, state.mapper);
  state.teacher = std::move(teacher);
  state.student = std::move(student);

  CensusContext ctx;
  const CensusContext* ctx_ptr = nullptr;
  if (config.loss.loss_kind == LossKind::Census) {
    ctx = make_census_context(state.scenario.sizes(), t, config.loss);
    ctx_ptr = &ctx;
  }

  provider.begin_task(t);
  FitResult log =
      fit(state.student, &*state.teacher, state.mapper, provider.train(t), config, t, ctx_ptr);
  state.logs.push_back({t, std::move(log.epoch_mean_loss), log.adam_steps});
  state.completed_tasks = t + 1;
  state.checkpoints.push_back(state.student);
}

ModelState train_joint(DatasetProvider& provider, const Scenario& scenario,
                       const TrainConfig& config, int upto) {
  validate_train_config(config);
  if (upto < 0 || upto >= scenario.num_tasks()) {
    throw std::invalid_argument("joint task range out of bounds");
  }

  LabelMapper mapper;
  for (int t = 0; t <= upto; ++t) mapper.extend(scenario.tasks[static_cast<std::size_t>(t)]);
  ModelState model = make_model(config.backbone, mapper.slots(), config.seed);
  check_slots(model, mapper);

  provider.begin_joint(upto);
  std::vector<PointCloud> pooled;
  for (int t = 0; t <= upto; ++t) {
    const std::vector<PointCloud>& part = provider.train(t);
    pooled.insert(pooled.end(), part.begin(), part.end());
  }

  // task_index 0 keeps the single-task joint run stream-identical to
  // train_base
  fit(model, nullptr, mapper, pooled, config, 0, nullptr);
  return model;
}

}  // namespace pointclimb
