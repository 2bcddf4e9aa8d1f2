#include "pointclimb/backbones.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "pointclimb/rng.hpp"

using namespace pointclimb;

namespace {

Tensor random_cloud(Rng& rng, int n) {
  std::vector<double> xyz(static_cast<size_t>(n) * 3);
  for (double& v : xyz) v = rng.next_range(-1.0, 1.0);
  return Tensor({n, 3}, std::move(xyz));
}

Tensor permute_rows(const Tensor& points, Rng& rng) {
  const int n = points.dim(0);
  std::vector<int> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  rng.shuffle(order);
  std::vector<double> out(points.values().size());
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      out[static_cast<size_t>(i * 3 + c)] = points.values()[static_cast<size_t>(order[static_cast<size_t>(i)] * 3 + c)];
    }
  }
  return Tensor(points.shape(), std::move(out));
}

FeatureExtractorConfig small_config(BackboneKind kind, Aggregation agg) {
  FeatureExtractorConfig cfg;
  cfg.kind = kind;
  cfg.widths = {8, 16};
  cfg.aggregation = agg;
  cfg.k_neighbors = 4;
  return cfg;
}

}  // namespace

TEST_CASE("feature extractors are permutation invariant") {
  Rng rng(900);
  for (BackboneKind kind : {BackboneKind::PointNetLite, BackboneKind::EdgeConvLite}) {
    for (Aggregation agg : {Aggregation::Max, Aggregation::Mean, Aggregation::Sum}) {
      const auto cfg = small_config(kind, agg);
      const FeatureExtractor ext = make_extractor(cfg, 17);
      ModelState m;
      m.extractor = ext;
      const auto tensors = [&] {
        ExtractorTensors t;
        for (const auto& w : ext.weights) t.weights.push_back(w.as_constant());
        for (const auto& b : ext.biases) t.biases.push_back(b.as_constant());
        return t;
      }();
      for (int trial = 0; trial < 17; ++trial) {
        const Tensor cloud = random_cloud(rng, 24);
        const auto a = extractor_forward(cloud, cfg, tensors).values();
        const auto b = extractor_forward(permute_rows(cloud, rng), cfg, tensors).values();
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) {
          CHECK(std::fabs(a[i] - b[i]) <= 1e-9);
        }
      }
    }
  }
}

TEST_CASE("pointnet forward matches a hand-computed single layer") {
  FeatureExtractorConfig cfg;
  cfg.kind = BackboneKind::PointNetLite;
  cfg.widths = {2};
  FeatureExtractor ext = make_extractor(cfg, 1);
  ext.weights[0] = Param({3, 2}, {1, 2, 3, 4, 5, 6});
  ext.biases[0] = Param({2}, {0.5, -1});
  // rows through the mlp: (1,0,0) -> (1.5, 1); (0,1,0) -> (3.5, 3)
  const Tensor pts({2, 3}, {1, 0, 0, 0, 1, 0});

  ExtractorTensors t;
  t.weights = {ext.weights[0].as_constant()};
  t.biases = {ext.biases[0].as_constant()};

  cfg.aggregation = Aggregation::Max;
  CHECK(extractor_forward(pts, cfg, t).values() == std::vector<double>{3.5, 3});
  cfg.aggregation = Aggregation::Mean;
  CHECK(extractor_forward(pts, cfg, t).values() == std::vector<double>{2.5, 2});
  cfg.aggregation = Aggregation::Sum;
  CHECK(extractor_forward(pts, cfg, t).values() == std::vector<double>{5, 4});
}

TEST_CASE("degenerate clouds collapse to the single-point response") {
  Rng rng(901);
  for (BackboneKind kind : {BackboneKind::PointNetLite, BackboneKind::EdgeConvLite}) {
    const auto cfg = small_config(kind, Aggregation::Max);
    const FeatureExtractor ext = make_extractor(cfg, 3);
    ExtractorTensors t;
    for (const auto& w : ext.weights) t.weights.push_back(w.as_constant());
    for (const auto& b : ext.biases) t.biases.push_back(b.as_constant());

    // all 12 points coincide
    std::vector<double> xyz;
    for (int i = 0; i < 12; ++i) {
      xyz.insert(xyz.end(), {0.3, -0.2, 0.7});
    }
    const Tensor cloud({12, 3}, xyz);
    const auto feat_max = extractor_forward(cloud, cfg, t).values();

    auto cfg_mean = cfg;
    cfg_mean.aggregation = Aggregation::Mean;
    const auto feat_mean = extractor_forward(cloud, cfg_mean, t).values();
    for (size_t i = 0; i < feat_max.size(); ++i) {
      CHECK(feat_max[i] == doctest::Approx(feat_mean[i]).epsilon(1e-12));
    }

    auto cfg_sum = cfg;
    cfg_sum.aggregation = Aggregation::Sum;
    const auto feat_sum = extractor_forward(cloud, cfg_sum, t).values();
    for (size_t i = 0; i < feat_max.size(); ++i) {
      CHECK(feat_sum[i] == doctest::Approx(12.0 * feat_max[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("edgeconv rejects clouds not larger than the neighborhood") {
  const auto cfg = small_config(BackboneKind::EdgeConvLite, Aggregation::Max);
  const FeatureExtractor ext = make_extractor(cfg, 3);
  ExtractorTensors t;
  for (const auto& w : ext.weights) t.weights.push_back(w.as_constant());
  for (const auto& b : ext.biases) t.biases.push_back(b.as_constant());
  Rng rng(902);
  CHECK_THROWS_AS(extractor_forward(random_cloud(rng, cfg.k_neighbors), cfg, t),
                  std::invalid_argument);
}

TEST_CASE("head forward matches direct products") {
  ClassifierHead head = make_head(3, {10, 20}, 5);

  // zero feature -> bias
  head.bias = Param({2}, {0.25, -0.75});
  HeadTensors ht{head.weight.as_constant(), head.bias.as_constant()};
  CHECK(head_forward(Tensor({3}, {0, 0, 0}), ht).values() == std::vector<double>{0.25, -0.75});

  // identity weights pass the feature through
  head.weight = Param({2, 2}, {1, 0, 0, 1});
  head.bias = Param({2}, {0, 0});
  HeadTensors id{head.weight.as_constant(), head.bias.as_constant()};
  CHECK(head_forward(Tensor({2}, {0.4, -0.9}), id).values() == std::vector<double>{0.4, -0.9});

  // random case against a manual matvec
  Rng rng(903);
  ClassifierHead rh = make_head(4, {0, 1, 2}, 77);
  std::vector<double> f{0.3, -0.5, 0.8, 0.1};
  HeadTensors rt{rh.weight.as_constant(), rh.bias.as_constant()};
  const auto got = head_forward(Tensor({4}, f), rt).values();
  for (int j = 0; j < 3; ++j) {
    double want = rh.bias.value[static_cast<size_t>(j)];
    for (int r = 0; r < 4; ++r) want += f[static_cast<size_t>(r)] * rh.weight.value[static_cast<size_t>(r * 3 + j)];
    CHECK(got[static_cast<size_t>(j)] == doctest::Approx(want).epsilon(1e-12));
  }

  CHECK_THROWS_AS(head_forward(Tensor({5}, {1, 2, 3, 4, 5}), rt), std::invalid_argument);
}

TEST_CASE("expand_head preserves old columns bit-exactly") {
  const ClassifierHead base = make_head(8, {5, 9, 1}, 42);
  const ClassifierHead grown = expand_head(base, {17, 3}, 42);

  REQUIRE(grown.num_classes() == 5);
  CHECK(grown.class_slots == std::vector<int>{5, 9, 1, 17, 3});
  for (int r = 0; r < 8; ++r) {
    for (int j = 0; j < 3; ++j) {
      CHECK(grown.weight.value[static_cast<size_t>(r * 5 + j)] ==
            base.weight.value[static_cast<size_t>(r * 3 + j)]);
    }
  }
  for (int j = 0; j < 3; ++j) CHECK(grown.bias.value[static_cast<size_t>(j)] == base.bias.value[static_cast<size_t>(j)]);

  // old logits are reproduced exactly on any feature
  Rng rng(904);
  std::vector<double> f(8);
  for (double& v : f) v = rng.next_range(-2.0, 2.0);
  HeadTensors bt{base.weight.as_constant(), base.bias.as_constant()};
  HeadTensors gt{grown.weight.as_constant(), grown.bias.as_constant()};
  const auto before = head_forward(Tensor({8}, f), bt).values();
  const auto after = head_forward(Tensor({8}, f), gt).values();
  for (int j = 0; j < 3; ++j) CHECK(before[static_cast<size_t>(j)] == after[static_cast<size_t>(j)]);
}

TEST_CASE("head expansion is path independent") {
  const ClassifierHead base = make_head(6, {0, 1}, 9);
  const ClassifierHead two_steps = expand_head(expand_head(base, {2, 3}, 9), {4}, 9);
  const ClassifierHead one_step = expand_head(base, {2, 3, 4}, 9);
  CHECK(two_steps.class_slots == one_step.class_slots);
  CHECK(two_steps.weight.value == one_step.weight.value);
  CHECK(two_steps.bias.value == one_step.bias.value);

  // per-class streams: a class's column does not depend on its position
  const ClassifierHead a = make_head(6, {3, 5}, 11);
  const ClassifierHead b = make_head(6, {5, 3}, 11);
  for (int r = 0; r < 6; ++r) {
    CHECK(a.weight.value[static_cast<size_t>(r * 2)] == b.weight.value[static_cast<size_t>(r * 2 + 1)]);
  }
}

TEST_CASE("expand_head validates class ids") {
  const ClassifierHead base = make_head(4, {1, 2}, 3);
  CHECK_THROWS_AS(expand_head(base, {2}, 3), std::invalid_argument);
  CHECK_THROWS_AS(expand_head(base, {7, 7}, 3), std::invalid_argument);
  const ClassifierHead same = expand_head(base, {}, 3);
  CHECK(same.class_slots == base.class_slots);
  CHECK(same.weight.value == base.weight.value);
}

TEST_CASE("model construction is seed deterministic") {
  const auto cfg = small_config(BackboneKind::PointNetLite, Aggregation::Max);
  const ModelState a = make_model(cfg, {0, 1, 2}, 123);
  const ModelState b = make_model(cfg, {0, 1, 2}, 123);
  const ModelState c = make_model(cfg, {0, 1, 2}, 124);
  CHECK(state_checksum(a) == state_checksum(b));
  CHECK(state_checksum(a) != state_checksum(c));
}

TEST_CASE("checksum reacts to any parameter drift") {
  const auto cfg = small_config(BackboneKind::PointNetLite, Aggregation::Max);
  ModelState m = make_model(cfg, {0, 1}, 5);
  const uint64_t before = state_checksum(m);
  m.extractor.weights[0].value[3] += 1e-12;
  CHECK(state_checksum(m) != before);
}

TEST_CASE("frozen models cannot be watched for training") {
  const auto cfg = small_config(BackboneKind::PointNetLite, Aggregation::Max);
  ModelState m = make_model(cfg, {0, 1}, 5);
  m.frozen = true;
  Tape tape;
  CHECK_THROWS_AS(watch_model(tape, m), std::logic_error);
}

TEST_CASE("model forward runs a batch through watch and constants alike") {
  const auto cfg = small_config(BackboneKind::PointNetLite, Aggregation::Max);
  ModelState m = make_model(cfg, {0, 1, 2}, 5);
  Rng rng(905);
  const std::vector<Tensor> batch{random_cloud(rng, 16), random_cloud(rng, 20)};

  const Tensor constant_logits = model_forward(batch, cfg, model_constants(m));
  CHECK(constant_logits.shape() == std::vector<int>{2, 3});
  CHECK_FALSE(constant_logits.on_tape());

  Tape tape;
  const Tensor taped_logits = model_forward(batch, cfg, watch_model(tape, m));
  CHECK(taped_logits.on_tape());
  CHECK(taped_logits.values() == constant_logits.values());
}

TEST_CASE("model json round-trips bit-exactly") {
  const auto cfg = small_config(BackboneKind::EdgeConvLite, Aggregation::Mean);
  ModelState m = make_model(cfg, {4, 7, 2}, 31);
  m.role = ModelState::Role::Teacher;
  m.frozen = true;

  const ModelState back = model_from_json(model_to_json(m));
  CHECK(state_checksum(back) == state_checksum(m));
  CHECK(back.role == ModelState::Role::Teacher);
  CHECK(back.frozen);
  CHECK(back.extractor.config.k_neighbors == cfg.k_neighbors);

  const std::string path = "test_model_roundtrip.json";
  save_model(m, path);
  const ModelState loaded = load_model(path);
  CHECK(state_checksum(loaded) == state_checksum(m));
  std::remove(path.c_str());

  auto bad = model_to_json(m);
  bad["kind"] = "resnet";
  CHECK_THROWS_AS(model_from_json(bad), std::invalid_argument);
}
