#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "pointclimb/tensor.hpp"

namespace pointclimb {

enum class Aggregation { Max, Mean, Sum };

enum class BackboneKind { PointNetLite, EdgeConvLite };

struct FeatureExtractorConfig {
  BackboneKind kind = BackboneKind::PointNetLite;
  // successive layer output widths; input dim is 3 (pointnet, per point) or
  // 6 (edgeconv, per edge)
  std::vector<int> widths = {64, 128, 256};
  Aggregation aggregation = Aggregation::Max;
  int k_neighbors = 8;  // edgeconv only

  int feature_dim() const { return widths.back(); }
  int input_dim() const { return kind == BackboneKind::EdgeConvLite ? 6 : 3; }
};

// Shared MLP weights of the feature extractor f(p; phi).
struct FeatureExtractor {
  FeatureExtractorConfig config;
  std::vector<Param> weights;  // layer l: [in_l x out_l]
  std::vector<Param> biases;   // layer l: [out_l]
};

// Expandable linear classifier g(; V). Column j scores class_slots[j].
struct ClassifierHead {
  Param weight;  // [feature_dim x num_classes]
  Param bias;    // [num_classes]
  std::vector<int> class_slots;

  int feature_dim() const { return weight.shape[0]; }
  int num_classes() const { return static_cast<int>(class_slots.size()); }
};

struct ModelState {
  enum class Role { Teacher, Student };
  FeatureExtractor extractor;
  ClassifierHead head;
  Role role = Role::Student;
  bool frozen = false;

  // trainable parameters in a fixed, documented order
  std::vector<Param*> params();
};

// Tape handles (or constants, for the frozen teacher) of all weights.
struct ExtractorTensors {
  std::vector<Tensor> weights, biases;
};
struct HeadTensors {
  Tensor weight, bias;
};
struct ModelTensors {
  ExtractorTensors extractor;
  HeadTensors head;
};

FeatureExtractor make_extractor(const FeatureExtractorConfig& config, uint64_t seed);

// Head over the given classes; columns seeded per class id so expansion
// order never changes a class's initial weights. Biases start at zero.
ClassifierHead make_head(int feature_dim, const std::vector<int>& class_ids,
                         uint64_t init_seed);

// Old columns and biases are preserved bit-exactly; new columns drawn
// uniform in [-1/sqrt(d), 1/sqrt(d)] from per-class streams of init_seed.
ClassifierHead expand_head(const ClassifierHead& head, const std::vector<int>& new_class_ids,
                           uint64_t init_seed);

ModelState make_model(const FeatureExtractorConfig& config,
                      const std::vector<int>& class_ids, uint64_t seed);

ModelTensors watch_model(Tape& tape, ModelState& model);
ModelTensors model_constants(const ModelState& model);

// Permutation-invariant feature of one cloud (constant tensor [n x 3]).
Tensor extractor_forward(const Tensor& points, const FeatureExtractorConfig& config,
                         const ExtractorTensors& params);

// logits = features * V + bias for a feature batch [B x d] -> [B x C].
Tensor head_forward(const Tensor& features, const HeadTensors& head);

// Full pipeline over a batch of clouds -> [B x num_classes] logits.
Tensor model_forward(const std::vector<Tensor>& clouds, const FeatureExtractorConfig& config,
                     const ModelTensors& model);

// Order-sensitive digest of every parameter bit; detects any drift.
uint64_t state_checksum(const ModelState& model);

nlohmann::ordered_json model_to_json(const ModelState& model);
ModelState model_from_json(const nlohmann::json& j);
void save_model(const ModelState& model, const std::string& path);
ModelState load_model(const std::string& path);

}  // namespace pointclimb
