#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "pointclimb/data.hpp"
#include "pointclimb/sampler.hpp"
#include "pointclimb/trainer.hpp"

using namespace pointclimb;

namespace {

TrainConfig tiny_config(uint64_t seed) {
  TrainConfig config;
  config.epochs = 2;
  config.batch_size = 4;
  config.lr = 2e-3;
  config.n_points = 48;
  config.seed = seed;
  config.backbone.widths = {16, 32};
  return config;
}

struct Fixture {
  Dataset dataset;
  Scenario scenario;

  Fixture(int classes, std::vector<int> sizes, uint64_t seed, int spc = 6, int pts = 48)
      : dataset(generate_synthetic_classes(classes, spc, pts, seed)),
        scenario(fixed_scenario(classes, sizes, seed)) {}
};

int predicted_column(const ModelState& model, const PointCloud& cloud, int n_points) {
  PointCloud view = evaluation_view(cloud, n_points);
  Tensor points({view.num_points(), 3}, view.xyz);
  Tensor logits =
      model_forward({points}, model.extractor.config, model_constants(model));
  int best = 0;
  for (int j = 1; j < logits.dim(1); ++j) {
    if (logits.values()[static_cast<std::size_t>(j)] >
        logits.values()[static_cast<std::size_t>(best)]) {
      best = j;
    }
  }
  return best;
}

std::vector<double> logit_row(const ModelState& model, const PointCloud& cloud, int n_points) {
  PointCloud view = evaluation_view(cloud, n_points);
  Tensor points({view.num_points(), 3}, view.xyz);
  Tensor logits =
      model_forward({points}, model.extractor.config, model_constants(model));
  return logits.values();
}

}  // namespace

TEST_CASE("same seed and config reproduce a run bit-exactly") {
  for (BackboneKind kind : {BackboneKind::PointNetLite, BackboneKind::EdgeConvLite}) {
    Fixture fx(4, {2, 2}, 11);
    TrainConfig config = tiny_config(21);
    config.backbone.kind = kind;
    config.loss.loss_kind = LossKind::Lwf;

    DatasetProvider p1(fx.dataset, fx.scenario);
    RunState a = train_base(p1, fx.scenario, config);
    advance_task(a, p1);

    DatasetProvider p2(fx.dataset, fx.scenario);
    RunState b = train_base(p2, fx.scenario, config);
    advance_task(b, p2);

    CHECK(state_checksum(a.student) == state_checksum(b.student));
    CHECK(state_checksum(*a.teacher) == state_checksum(*b.teacher));
    CHECK(a.logs[1].epoch_mean_loss == b.logs[1].epoch_mean_loss);

    TrainConfig other = config;
    other.seed = 22;
    DatasetProvider p3(fx.dataset, fx.scenario);
    RunState c = train_base(p3, fx.scenario, other);
    CHECK(state_checksum(a.checkpoints[0]) != state_checksum(c.student));
  }
}

TEST_CASE("zero epochs leave the base model at its initialization") {
  Fixture fx(2, {2}, 5);
  TrainConfig config = tiny_config(9);
  config.epochs = 0;

  DatasetProvider provider(fx.dataset, fx.scenario);
  RunState state = train_base(provider, fx.scenario, config);
  ModelState init = make_model(config.backbone, fx.scenario.tasks[0], config.seed);
  CHECK(state_checksum(state.student) == state_checksum(init));
  CHECK(state.logs[0].adam_steps == 0);
  CHECK(state.logs[0].epoch_mean_loss.empty());
}

TEST_CASE("zero-epoch advance is a pure copy with expansion") {
  Fixture fx(4, {2, 2}, 31);
  TrainConfig config = tiny_config(7);
  config.epochs = 2;

  DatasetProvider provider(fx.dataset, fx.scenario);
  RunState state = train_base(provider, fx.scenario, config);
  state.config.epochs = 0;
  advance_task(state, provider);

  CHECK(state.student.head.num_classes() == 4);
  CHECK(state.student.head.class_slots == state.mapper.slots());
  CHECK(state.teacher->frozen);
  CHECK(state.logs[1].adam_steps == 0);

  for (int t = 0; t < 2; ++t) {
    for (const PointCloud& cloud : provider.test(t)) {
      std::vector<double> student_row = logit_row(state.student, cloud, config.n_points);
      std::vector<double> teacher_row = logit_row(*state.teacher, cloud, config.n_points);
      REQUIRE(student_row.size() == 4);
      REQUIRE(teacher_row.size() == 2);
      CHECK(student_row[0] == teacher_row[0]);
      CHECK(student_row[1] == teacher_row[1]);
    }
  }
}

TEST_CASE("base training separates two synthetic classes") {
  Fixture fx(2, {2}, 3, 10);
  TrainConfig config = tiny_config(13);
  config.epochs = 40;
  config.lr = 1e-2;
  config.batch_size = 8;

  DatasetProvider provider(fx.dataset, fx.scenario);
  RunState state = train_base(provider, fx.scenario, config);

  const TaskLog& log = state.logs[0];
  CHECK(log.epoch_mean_loss.back() < log.epoch_mean_loss.front());

  int hits = 0, total = 0;
  for (const PointCloud& cloud : provider.train(0)) {
    int want = state.mapper.logit(cloud.global_class);
    hits += predicted_column(state.student, cloud, config.n_points) == want;
    ++total;
  }
  CHECK(total == 16);
  CHECK(static_cast<double>(hits) / total >= 0.99);
}

TEST_CASE("every batch steps adam once and partial batches are kept") {
  Fixture fx(2, {2}, 17, 7);
  TrainConfig config = tiny_config(1);
  config.epochs = 3;
  config.batch_size = 4;

  DatasetProvider provider(fx.dataset, fx.scenario);
  RunState state = train_base(provider, fx.scenario, config);
  REQUIRE(static_cast<int>(provider.train(0).size()) == 10);
  CHECK(state.logs[0].adam_steps == 9);
  CHECK(state.logs[0].epoch_mean_loss.size() == 3);
}

TEST_CASE("the teacher never changes during an incremental task") {
  Fixture fx(4, {2, 2}, 41);
  TrainConfig config = tiny_config(4);
  config.loss.loss_kind = LossKind::Census;

  DatasetProvider provider(fx.dataset, fx.scenario);
  RunState state = train_base(provider, fx.scenario, config);
  uint64_t base_digest = state_checksum(state.student);
  advance_task(state, provider);

  CHECK(state_checksum(*state.teacher) == base_digest);
  CHECK(state_checksum(state.checkpoints[0]) == base_digest);
  CHECK(state_checksum(state.student) != base_digest);

  Tape tape;
  CHECK_THROWS_AS(watch_model(tape, *state.teacher), std::logic_error);
}

TEST_CASE("incremental training reads no prior task data") {
  Fixture fx(6, {2, 2, 2}, 53);
  TrainConfig config = tiny_config(6);
  config.loss.loss_kind = LossKind::Lwf;

  DatasetProvider provider(fx.dataset, fx.scenario);
  RunState state = train_base(provider, fx.scenario, config);
  advance_task(state, provider);
  advance_task(state, provider);

  const auto& log = provider.train_access_log();
  CHECK(!log.empty());
  int highest = 0;
  for (const auto& access : log) {
    CHECK(!access.joint_mode);
    CHECK(access.task >= highest);  // tasks never revisited once left
    highest = std::max(highest, access.task);
  }
  CHECK(highest == 2);
}

TEST_CASE("single-task joint training equals base training") {
  Fixture fx(3, {3}, 23, 6);
  TrainConfig config = tiny_config(2);

  DatasetProvider p1(fx.dataset, fx.scenario);
  RunState base = train_base(p1, fx.scenario, config);

  DatasetProvider p2(fx.dataset, fx.scenario);
  ModelState joint = train_joint(p2, fx.scenario, config, 0);
  CHECK(state_checksum(joint) == state_checksum(base.student));
}

TEST_CASE("census and lwf coincide when lambda equals the census weight") {
  Fixture fx(4, {2, 2}, 61);

  TrainConfig census = tiny_config(8);
  census.loss.loss_kind = LossKind::Census;

  TrainConfig lwf = census;
  lwf.loss.loss_kind = LossKind::Lwf;
  lwf.loss.lambda_lwf = 2.0;  // eta 2, one task elapsed

  DatasetProvider p1(fx.dataset, fx.scenario);
  RunState a = train_base(p1, fx.scenario, census);
  advance_task(a, p1);

  DatasetProvider p2(fx.dataset, fx.scenario);
  RunState b = train_base(p2, fx.scenario, lwf);
  advance_task(b, p2);

  CHECK(state_checksum(a.student) == state_checksum(b.student));
}

TEST_CASE("evaluation views are fixed and normalized") {
  Dataset dataset = generate_synthetic_classes(2, 4, 64, 77);
  const PointCloud& cloud = dataset.train[0];

  PointCloud once = evaluation_view(cloud, 48);
  PointCloud twice = evaluation_view(cloud, 48);
  CHECK(once.num_points() == 48);
  CHECK(once.xyz == twice.xyz);

  double max_radius = 0.0;
  for (int i = 0; i < once.num_points(); ++i) {
    double r = std::hypot(once.xyz[static_cast<std::size_t>(i) * 3],
                          once.xyz[static_cast<std::size_t>(i) * 3 + 1],
                          once.xyz[static_cast<std::size_t>(i) * 3 + 2]);
    max_radius = std::max(max_radius, r);
  }
  CHECK(max_radius == doctest::Approx(1.0).epsilon(1e-9));

  PointCloud whole = evaluation_view(cloud, 64);
  CHECK(whole.num_points() == 64);
}

TEST_CASE("trainer rejects invalid configurations and transitions") {
  Fixture fx(4, {2, 2}, 19);
  DatasetProvider provider(fx.dataset, fx.scenario);

  TrainConfig bad = tiny_config(1);
  bad.epochs = -1;
  CHECK_THROWS_AS(train_base(provider, fx.scenario, bad), std::invalid_argument);
  bad = tiny_config(1);
  bad.lr = 0.0;
  CHECK_THROWS_AS(train_base(provider, fx.scenario, bad), std::invalid_argument);
  bad = tiny_config(1);
  bad.batch_size = 0;
  CHECK_THROWS_AS(train_base(provider, fx.scenario, bad), std::invalid_argument);
  bad = tiny_config(1);
  bad.loss.tau = 0.0;
  CHECK_THROWS_AS(train_base(provider, fx.scenario, bad), std::invalid_argument);

  TrainConfig joint_kind = tiny_config(1);
  joint_kind.loss.loss_kind = LossKind::Joint;
  RunState state = train_base(provider, fx.scenario, joint_kind);
  CHECK_THROWS_AS(advance_task(state, provider), std::invalid_argument);

  TrainConfig config = tiny_config(1);
  DatasetProvider p2(fx.dataset, fx.scenario);
  RunState overlap = train_base(p2, fx.scenario, config);
  overlap.scenario.tasks[1] = overlap.scenario.tasks[0];
  CHECK_THROWS_AS(advance_task(overlap, p2), std::invalid_argument);

  DatasetProvider p3(fx.dataset, fx.scenario);
  RunState done = train_base(p3, fx.scenario, config);
  advance_task(done, p3);
  CHECK_THROWS_AS(advance_task(done, p3), std::invalid_argument);

  CHECK_THROWS_AS(train_joint(p3, fx.scenario, config, 2), std::invalid_argument);
  CHECK_THROWS_AS(train_joint(p3, fx.scenario, config, -1), std::invalid_argument);
}
