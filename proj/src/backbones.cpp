#include "pointclimb/backbones.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "pointclimb/kernels.hpp"
#include "pointclimb/rng.hpp"

namespace pointclimb {

namespace {

Param uniform_param(std::vector<int> shape, double bound, Rng& rng) {
  int n = 1;
  for (int d : shape) n *= d;
  std::vector<double> v(static_cast<size_t>(n));
  for (double& x : v) x = rng.next_range(-bound, bound);
  return Param(std::move(shape), std::move(v));
}

// One fresh column of head weights for a class id. Streams are keyed by the
// class alone, which makes +5 then +5 identical to +10.
std::vector<double> head_column(int feature_dim, int class_id, uint64_t init_seed) {
  Rng rng(mix(mix(init_seed, "head/class"), static_cast<uint64_t>(class_id)));
  const double bound = 1.0 / std::sqrt(static_cast<double>(feature_dim));
  std::vector<double> col(static_cast<size_t>(feature_dim));
  for (double& v : col) v = rng.next_range(-bound, bound);
  return col;
}

void check_points(const Tensor& points) {
  if (points.rank() != 2 || points.dim(1) != 3 || points.dim(0) < 1) {
    throw std::invalid_argument("extractor_forward: points must be [n x 3], n >= 1");
  }
}

Reduce to_reduce(Aggregation a) {
  switch (a) {
    case Aggregation::Max: return Reduce::Max;
    case Aggregation::Mean: return Reduce::Mean;
    case Aggregation::Sum: return Reduce::Sum;
  }
  throw std::logic_error("unknown aggregation");
}

Tensor shared_mlp(Tensor h, const ExtractorTensors& params) {
  for (size_t l = 0; l < params.weights.size(); ++l) {
    h = relu(add_rowwise(matmul(h, params.weights[l]), params.biases[l]));
  }
  return h;
}

}  // namespace

std::vector<Param*> ModelState::params() {
  std::vector<Param*> out;
  for (auto& w : extractor.weights) out.push_back(&w);
  for (auto& b : extractor.biases) out.push_back(&b);
  out.push_back(&head.weight);
  out.push_back(&head.bias);
  return out;
}

FeatureExtractor make_extractor(const FeatureExtractorConfig& config, uint64_t seed) {
  if (config.widths.empty()) throw std::invalid_argument("extractor needs at least one layer");
  for (int w : config.widths) {
    if (w < 1) throw std::invalid_argument("extractor widths must be positive");
  }
  if (config.kind == BackboneKind::EdgeConvLite && config.k_neighbors < 1) {
    throw std::invalid_argument("edgeconv needs k_neighbors >= 1");
  }

  FeatureExtractor ext;
  ext.config = config;
  int in = config.input_dim();
  for (size_t l = 0; l < config.widths.size(); ++l) {
    const int out = config.widths[l];
    Rng rng(mix(mix(seed, "extractor/layer"), static_cast<uint64_t>(l)));
    ext.weights.push_back(uniform_param({in, out}, 1.0 / std::sqrt(static_cast<double>(in)), rng));
    ext.biases.push_back(Param({out}, std::vector<double>(static_cast<size_t>(out), 0.0)));
    in = out;
  }
  return ext;
}

ClassifierHead make_head(int feature_dim, const std::vector<int>& class_ids,
                         uint64_t init_seed) {
  if (feature_dim < 1) throw std::invalid_argument("make_head: feature_dim >= 1");
  if (class_ids.empty()) throw std::invalid_argument("make_head: need at least one class");
  // route through expand_head so first construction and later growth share
  // one initialization path
  ClassifierHead empty;
  empty.weight.shape = {feature_dim, 0};
  empty.bias.shape = {0};
  return expand_head(empty, class_ids, init_seed);
}

ClassifierHead expand_head(const ClassifierHead& head, const std::vector<int>& new_class_ids,
                           uint64_t init_seed) {
  for (int c : new_class_ids) {
    for (int existing : head.class_slots) {
      if (c == existing) {
        throw std::invalid_argument("expand_head: class " + std::to_string(c) +
                                    " already has a column");
      }
    }
  }
  for (size_t i = 0; i < new_class_ids.size(); ++i) {
    for (size_t j = i + 1; j < new_class_ids.size(); ++j) {
      if (new_class_ids[i] == new_class_ids[j]) {
        throw std::invalid_argument("expand_head: duplicate new class id");
      }
    }
  }
  if (new_class_ids.empty()) return head;

  const int d = head.weight.shape[0];
  const int old_c = head.num_classes();
  const int new_c = old_c + static_cast<int>(new_class_ids.size());

  std::vector<std::vector<double>> columns;
  columns.reserve(new_class_ids.size());
  for (int c : new_class_ids) columns.push_back(head_column(d, c, init_seed));

  std::vector<double> w(static_cast<size_t>(d) * static_cast<size_t>(new_c));
  for (int r = 0; r < d; ++r) {
    for (int j = 0; j < old_c; ++j) {
      w[static_cast<size_t>(r * new_c + j)] = head.weight.value[static_cast<size_t>(r * old_c + j)];
    }
    for (size_t j = 0; j < columns.size(); ++j) {
      w[static_cast<size_t>(r * new_c + old_c) + j] = columns[j][static_cast<size_t>(r)];
    }
  }
  std::vector<double> b(static_cast<size_t>(new_c), 0.0);
  for (int j = 0; j < old_c; ++j) b[static_cast<size_t>(j)] = head.bias.value[static_cast<size_t>(j)];

  ClassifierHead out;
  out.weight = Param({d, new_c}, std::move(w));
  out.bias = Param({new_c}, std::move(b));
  out.class_slots = head.class_slots;
  out.class_slots.insert(out.class_slots.end(), new_class_ids.begin(), new_class_ids.end());
  return out;
}

ModelState make_model(const FeatureExtractorConfig& config,
                      const std::vector<int>& class_ids, uint64_t seed) {
  ModelState m;
  m.extractor = make_extractor(config, seed);
  m.head = make_head(config.feature_dim(), class_ids, seed);
  return m;
}

ModelTensors watch_model(Tape& tape, ModelState& model) {
  if (model.frozen) {
    throw std::logic_error("watch_model: refusing to expose a frozen model for training");
  }
  ModelTensors t;
  for (auto& w : model.extractor.weights) t.extractor.weights.push_back(tape.watch(w));
  for (auto& b : model.extractor.biases) t.extractor.biases.push_back(tape.watch(b));
  t.head.weight = tape.watch(model.head.weight);
  t.head.bias = tape.watch(model.head.bias);
  return t;
}

ModelTensors model_constants(const ModelState& model) {
  ModelTensors t;
  for (const auto& w : model.extractor.weights) t.extractor.weights.push_back(w.as_constant());
  for (const auto& b : model.extractor.biases) t.extractor.biases.push_back(b.as_constant());
  t.head.weight = model.head.weight.as_constant();
  t.head.bias = model.head.bias.as_constant();
  return t;
}

Tensor extractor_forward(const Tensor& points, const FeatureExtractorConfig& config,
                         const ExtractorTensors& params) {
  check_points(points);
  if (params.weights.size() != config.widths.size()) {
    throw std::invalid_argument("extractor_forward: weight count differs from config");
  }

  if (config.kind == BackboneKind::PointNetLite) {
    return reduce_axis(shared_mlp(points, params), 0, to_reduce(config.aggregation));
  }

  // edgeconv_lite
  const int n = points.dim(0);
  const int k = config.k_neighbors;
  if (n <= k) {
    throw std::invalid_argument("extractor_forward: edgeconv needs n > k_neighbors");
  }
  std::vector<int> idx(static_cast<size_t>(n) * static_cast<size_t>(k));
  kernels::knn(points.values().data(), n, k, idx.data());

  // edge features (x_i, x_j - x_i), one row per (i, neighbor) pair; the
  // coordinates carry no gradient, so this is a plain constant
  std::vector<double> edges(static_cast<size_t>(n) * static_cast<size_t>(k) * 6);
  const auto& xyz = points.values();
  for (int i = 0; i < n; ++i) {
    for (int s = 0; s < k; ++s) {
      const int j = idx[static_cast<size_t>(i * k + s)];
      double* row = edges.data() + (static_cast<size_t>(i) * k + static_cast<size_t>(s)) * 6;
      for (int c = 0; c < 3; ++c) {
        row[c] = xyz[static_cast<size_t>(i * 3 + c)];
        row[3 + c] = xyz[static_cast<size_t>(j * 3 + c)] - xyz[static_cast<size_t>(i * 3 + c)];
      }
    }
  }

  Tensor h = shared_mlp(Tensor({n * k, 6}, std::move(edges)), params);
  const int w = config.feature_dim();
  h = reduce_axis(reshape(h, {n, k, w}), 1, Reduce::Max);  // max over neighbors
  return reduce_axis(h, 0, to_reduce(config.aggregation));
}

Tensor head_forward(const Tensor& features, const HeadTensors& head) {
  if (features.rank() == 1) {
    return head_forward(reshape(features, {1, features.dim(0)}), head);
  }
  if (features.rank() != 2 || features.dim(1) != head.weight.dim(0)) {
    throw std::invalid_argument("head_forward: feature dimension mismatch");
  }
  return add_rowwise(matmul(features, head.weight), head.bias);
}

Tensor model_forward(const std::vector<Tensor>& clouds, const FeatureExtractorConfig& config,
                     const ModelTensors& model) {
  if (clouds.empty()) throw std::invalid_argument("model_forward: empty batch");
  std::vector<Tensor> features;
  features.reserve(clouds.size());
  for (const Tensor& cloud : clouds) {
    features.push_back(extractor_forward(cloud, config, model.extractor));
  }
  return head_forward(stack_rows(features), model.head);
}

uint64_t state_checksum(const ModelState& model) {
  uint64_t h = 1469598103934665603ull;  // FNV-1a
  const auto eat_bytes = [&h](const void* p, size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  const auto eat_param = [&](const Param& p) {
    for (int d : p.shape) eat_bytes(&d, sizeof(d));
    eat_bytes(p.value.data(), p.value.size() * sizeof(double));
  };
  for (const auto& w : model.extractor.weights) eat_param(w);
  for (const auto& b : model.extractor.biases) eat_param(b);
  eat_param(model.head.weight);
  eat_param(model.head.bias);
  eat_bytes(model.head.class_slots.data(), model.head.class_slots.size() * sizeof(int));
  return h;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

nlohmann::ordered_json param_to_json(const Param& p) {
  return {{"shape", p.shape}, {"data", p.value}};
}

Param param_from_json(const nlohmann::json& j) {
  return Param(j.at("shape").get<std::vector<int>>(),
               j.at("data").get<std::vector<double>>());
}

std::string kind_name(BackboneKind k) {
  return k == BackboneKind::PointNetLite ? "pointnet_lite" : "edgeconv_lite";
}

BackboneKind kind_from_name(const std::string& s) {
  if (s == "pointnet_lite") return BackboneKind::PointNetLite;
  if (s == "edgeconv_lite") return BackboneKind::EdgeConvLite;
  throw std::invalid_argument("unknown backbone kind: " + s);
}

std::string agg_name(Aggregation a) {
  switch (a) {
    case Aggregation::Max: return "max";
    case Aggregation::Mean: return "mean";
    case Aggregation::Sum: return "sum";
  }
  throw std::logic_error("unknown aggregation");
}

Aggregation agg_from_name(const std::string& s) {
  if (s == "max") return Aggregation::Max;
  if (s == "mean") return Aggregation::Mean;
  if (s == "sum") return Aggregation::Sum;
  throw std::invalid_argument("unknown aggregation: " + s);
}

}  // namespace

nlohmann::ordered_json model_to_json(const ModelState& model) {
  nlohmann::ordered_json j;
  j["kind"] = kind_name(model.extractor.config.kind);
  j["widths"] = model.extractor.config.widths;
  j["aggregation"] = agg_name(model.extractor.config.aggregation);
  j["k_neighbors"] = model.extractor.config.k_neighbors;
  j["role"] = model.role == ModelState::Role::Teacher ? "teacher" : "student";
  j["frozen"] = model.frozen;
  j["extractor"] = nlohmann::ordered_json::object();
  j["extractor"]["weights"] = nlohmann::ordered_json::array();
  j["extractor"]["biases"] = nlohmann::ordered_json::array();
  for (const auto& w : model.extractor.weights) j["extractor"]["weights"].push_back(param_to_json(w));
  for (const auto& b : model.extractor.biases) j["extractor"]["biases"].push_back(param_to_json(b));
  j["head"] = {{"weight", param_to_json(model.head.weight)},
               {"bias", param_to_json(model.head.bias)},
               {"class_slots", model.head.class_slots}};
  return j;
}

ModelState model_from_json(const nlohmann::json& j) {
  ModelState m;
  m.extractor.config.kind = kind_from_name(j.at("kind").get<std::string>());
  m.extractor.config.widths = j.at("widths").get<std::vector<int>>();
  m.extractor.config.aggregation = agg_from_name(j.at("aggregation").get<std::string>());
  m.extractor.config.k_neighbors = j.at("k_neighbors").get<int>();
  m.role = j.at("role").get<std::string>() == "teacher" ? ModelState::Role::Teacher
                                                        : ModelState::Role::Student;
  m.frozen = j.at("frozen").get<bool>();
  for (const auto& w : j.at("extractor").at("weights")) m.extractor.weights.push_back(param_from_json(w));
  for (const auto& b : j.at("extractor").at("biases")) m.extractor.biases.push_back(param_from_json(b));
  m.head.weight = param_from_json(j.at("head").at("weight"));
  m.head.bias = param_from_json(j.at("head").at("bias"));
  m.head.class_slots = j.at("head").at("class_slots").get<std::vector<int>>();

  if (m.extractor.weights.size() != m.extractor.config.widths.size() ||
      m.extractor.biases.size() != m.extractor.config.widths.size()) {
    throw std::invalid_argument("model json: layer count differs from widths");
  }
  if (m.head.weight.shape[1] != m.head.num_classes() ||
      m.head.weight.shape[0] != m.extractor.config.feature_dim()) {
    throw std::invalid_argument("model json: head shape inconsistent");
  }
  return m;
}

void save_model(const ModelState& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << model_to_json(model).dump(2) << '\n';
}

ModelState load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return model_from_json(nlohmann::json::parse(in));
}

}  // namespace pointclimb
