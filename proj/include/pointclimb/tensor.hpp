#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace pointclimb {

class Tape;

// Dense row-major tensor of doubles. The payload is immutable once built;
// every op returns a fresh tensor, which is what makes replaying the tape
// backward sound. A tensor is either a constant (node() < 0) or a handle to
// a node on some tape.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::vector<int> shape, std::vector<double> data);

  static Tensor scalar(double v);
  static Tensor zeros(std::vector<int> shape);
  static Tensor full(std::vector<int> shape, double v);

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  int numel() const;
  const std::vector<double>& values() const { return *data_; }
  double scalar_value() const;

  bool on_tape() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  int node() const { return node_; }

  // Same values, no tape attachment. Gradients never flow through the result.
  Tensor detached() const;

 private:
  friend class Tape;
  std::vector<int> shape_;
  std::shared_ptr<const std::vector<double>> data_;
  Tape* tape_ = nullptr;
  int node_ = -1;
};

// Trainable leaf storage. Lives outside any tape; a training step watches it
// on a fresh tape, runs forward/backward, then reads grad back here.
struct Param {
  std::vector<int> shape;
  std::vector<double> value;
  std::vector<double> grad;

  Param() = default;
  Param(std::vector<int> shape_in, std::vector<double> value_in);

  int numel() const { return static_cast<int>(value.size()); }
  Tensor as_constant() const { return Tensor(shape, value); }
};

// Reverse-mode gradient tape: an append-only list of recorded primitives in
// execution order (inputs always precede their outputs). backward() replays
// the list once in reverse from a scalar root and deposits d(root)/d(param)
// into every watched Param's grad; params the root never touched get zeros.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Tensor watch(Param& p);

  void backward(const Tensor& root);

  int size() const { return static_cast<int>(nodes_.size()); }

  // Gradient of the last backward() root w.r.t. a recorded node.
  const std::vector<double>& grad(const Tensor& t) const;

  // Recording hook used by the op layer.
  using PullFn = std::function<void(const std::vector<double>& out_grad,
                                    Tape& tape)>;
  Tensor record(std::vector<int> shape, std::vector<double> data,
                std::vector<int> input_nodes, PullFn pull);
  void accumulate(int node, const std::vector<double>& delta);

 private:
  struct Node {
    std::vector<int> shape;
    std::shared_ptr<const std::vector<double>> value;
    std::vector<double> grad;
    std::vector<int> inputs;
    PullFn pull;
    Param* param = nullptr;
  };
  std::vector<Node> nodes_;
  std::vector<Param*> watched_;
};

// ---------------------------------------------------------------------------
// Primitive ops. Each op works on constants and on tape-recorded tensors; if
// any input is on a tape the result is recorded there with its backward rule.
// Mixing tensors from two different tapes is an error. Every op validates
// that its output is finite.
// ---------------------------------------------------------------------------

enum class Reduce { Sum, Mean, Max };

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
// a [m x n] plus bias [n] broadcast over rows.
Tensor add_rowwise(const Tensor& a, const Tensor& bias);
Tensor relu(const Tensor& a);
Tensor log(const Tensor& a);

// Reduce one axis away. Rank of the result is rank(a) - 1. Max breaks ties
// toward the lowest index along the reduced axis.
Tensor reduce_axis(const Tensor& a, int axis, Reduce kind);
Tensor reduce_all_sum(const Tensor& a);

Tensor reshape(const Tensor& a, std::vector<int> new_shape);
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor stack_rows(const std::vector<Tensor>& rows);
Tensor gather_rows(const Tensor& a, const std::vector<int>& idx);
Tensor slice_cols(const Tensor& a, int begin, int end);

// Probability vector exp(x_i/tau) / sum_j exp(x_j/tau) over a rank-1 tensor,
// computed with max subtraction. tau must be positive.
Tensor softmax_with_temperature(const Tensor& logits, double tau);
// Row-wise variants over [N x C].
Tensor softmax_rows(const Tensor& logits, double tau);
Tensor log_softmax_rows(const Tensor& logits, double tau);
// Mean negative log likelihood of per-row labels under log_probs [N x C].
Tensor nll_loss(const Tensor& log_probs, const std::vector<int>& labels);

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Standard Adam with bias correction. One instance owns the moment arrays
// for a fixed parameter list; step() consumes the params' current grads.
class Adam {
 public:
  Adam(std::vector<Param*> params, AdamConfig cfg);

  void step();
  int64_t steps_taken() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  std::vector<Param*> params_;
  std::vector<std::vector<double>> m_, v_;
  AdamConfig cfg_;
  int64_t t_ = 0;
};

namespace detail {
int shape_numel(const std::vector<int>& shape);
void ensure_finite(const std::vector<double>& data, const char* what);
}  // namespace detail

}  // namespace pointclimb
