#include "pointclimb/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pointclimb/kernels.hpp"

namespace pointclimb {

namespace detail {

int shape_numel(const std::vector<int>& shape) {
  int n = 1;
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("tensor shape extents must be positive");
    n *= d;
  }
  return n;
}

void ensure_finite(const std::vector<double>& data, const char* what) {
  for (double v : data) {
    if (!std::isfinite(v)) {
      throw std::runtime_error(std::string("non-finite value in ") + what);
    }
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Tensor
// ---------------------------------------------------------------------------

Tensor::Tensor(std::vector<int> shape, std::vector<double> data) {
  const int n = detail::shape_numel(shape);
  if (n != static_cast<int>(data.size())) {
    throw std::invalid_argument("tensor data length does not match shape");
  }
  detail::ensure_finite(data, "tensor");
  shape_ = std::move(shape);
  data_ = std::make_shared<const std::vector<double>>(std::move(data));
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::zeros(std::vector<int> shape) {
  const int n = detail::shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(static_cast<size_t>(n), 0.0));
}

Tensor Tensor::full(std::vector<int> shape, double v) {
  const int n = detail::shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(static_cast<size_t>(n), v));
}

int Tensor::numel() const { return data_ ? static_cast<int>(data_->size()) : 0; }

double Tensor::scalar_value() const {
  if (numel() != 1) throw std::invalid_argument("scalar_value on non-scalar tensor");
  return (*data_)[0];
}

Tensor Tensor::detached() const {
  Tensor t;
  t.shape_ = shape_;
  t.data_ = data_;
  return t;
}

// ---------------------------------------------------------------------------
// Param
// ---------------------------------------------------------------------------

Param::Param(std::vector<int> shape_in, std::vector<double> value_in) {
  const int n = detail::shape_numel(shape_in);
  if (n != static_cast<int>(value_in.size())) {
    throw std::invalid_argument("param data length does not match shape");
  }
  detail::ensure_finite(value_in, "param");
  shape = std::move(shape_in);
  value = std::move(value_in);
  grad.assign(value.size(), 0.0);
}

// ---------------------------------------------------------------------------
// Tape
// ---------------------------------------------------------------------------

Tensor Tape::watch(Param& p) {
  Node node;
  node.shape = p.shape;
  node.value = std::make_shared<const std::vector<double>>(p.value);
  node.param = &p;
  nodes_.push_back(std::move(node));
  watched_.push_back(&p);

  Tensor t;
  t.shape_ = p.shape;
  t.data_ = nodes_.back().value;
  t.tape_ = this;
  t.node_ = static_cast<int>(nodes_.size()) - 1;
  return t;
}

Tensor Tape::record(std::vector<int> shape, std::vector<double> data,
                    std::vector<int> input_nodes, PullFn pull) {
  detail::ensure_finite(data, "op output");
  Node node;
  node.shape = shape;
  node.value = std::make_shared<const std::vector<double>>(std::move(data));
  node.inputs = std::move(input_nodes);
  node.pull = std::move(pull);
  nodes_.push_back(std::move(node));

  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = nodes_.back().value;
  t.tape_ = this;
  t.node_ = static_cast<int>(nodes_.size()) - 1;
  return t;
}

void Tape::accumulate(int node, const std::vector<double>& delta) {
  auto& g = nodes_[static_cast<size_t>(node)].grad;
  for (size_t i = 0; i < delta.size(); ++i) g[i] += delta[i];
}

void Tape::backward(const Tensor& root) {
  if (root.tape() != this || root.node() < 0) {
    throw std::logic_error("backward: root is not recorded on this tape");
  }
  if (root.numel() != 1) {
    throw std::invalid_argument("backward: root must be a scalar");
  }

  for (auto& node : nodes_) node.grad.assign(node.value->size(), 0.0);
  nodes_[static_cast<size_t>(root.node())].grad[0] = 1.0;

  // Nodes were appended in execution order, so a single reverse sweep visits
  // every node after all of its consumers.
  for (int id = root.node(); id >= 0; --id) {
    auto& node = nodes_[static_cast<size_t>(id)];
    if (node.pull) node.pull(node.grad, *this);
  }

  for (Param* p : watched_) p->grad.assign(p->value.size(), 0.0);
  for (auto& node : nodes_) {
    if (node.param != nullptr) {
      for (size_t i = 0; i < node.grad.size(); ++i) node.param->grad[i] += node.grad[i];
    }
  }
}

const std::vector<double>& Tape::grad(const Tensor& t) const {
  if (t.tape() != this || t.node() < 0) {
    throw std::logic_error("grad: tensor is not recorded on this tape");
  }
  return nodes_[static_cast<size_t>(t.node())].grad;
}

// ---------------------------------------------------------------------------
// Op plumbing
// ---------------------------------------------------------------------------

namespace {

Tape* common_tape(std::initializer_list<const Tensor*> ts) {
  Tape* tape = nullptr;
  for (const Tensor* t : ts) {
    if (!t->on_tape()) continue;
    if (tape == nullptr) {
      tape = t->tape();
    } else if (tape != t->tape()) {
      throw std::logic_error("op inputs belong to different tapes");
    }
  }
  return tape;
}

Tensor emit(Tape* tape, std::vector<int> shape, std::vector<double> data,
            std::vector<int> input_nodes, Tape::PullFn pull) {
  if (tape == nullptr) return Tensor(std::move(shape), std::move(data));
  return tape->record(std::move(shape), std::move(data), std::move(input_nodes),
                      std::move(pull));
}

void require_rank(const Tensor& t, int rank, const char* op) {
  if (t.rank() != rank) {
    throw std::invalid_argument(std::string(op) + ": unexpected tensor rank");
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Primitives
// ---------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) throw std::invalid_argument("matmul: inner dimensions differ");

  std::vector<double> out(static_cast<size_t>(m) * static_cast<size_t>(n));
  kernels::matmul(a.values().data(), b.values().data(), out.data(), m, k, n,
                  false, false);

  Tape* tape = common_tape({&a, &b});
  const int an = a.node(), bn = b.node();
  auto av = a.values();
  auto bv = b.values();
  return emit(
      tape, {m, n}, std::move(out), {an, bn},
      [an, bn, av = std::move(av), bv = std::move(bv), m, k, n](
          const std::vector<double>& g, Tape& t) {
        if (an >= 0) {
          std::vector<double> da(static_cast<size_t>(m) * static_cast<size_t>(k));
          kernels::matmul(g.data(), bv.data(), da.data(), m, n, k, false, true);
          t.accumulate(an, da);
        }
        if (bn >= 0) {
          std::vector<double> db(static_cast<size_t>(k) * static_cast<size_t>(n));
          kernels::matmul(av.data(), g.data(), db.data(), k, m, n, true, false);
          t.accumulate(bn, db);
        }
      });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.values());
  for (size_t i = 0; i < out.size(); ++i) out[i] += b.values()[i];
  Tape* tape = common_tape({&a, &b});
  const int an = a.node(), bn = b.node();
  return emit(tape, a.shape(), std::move(out), {an, bn},
              [an, bn](const std::vector<double>& g, Tape& t) {
                if (an >= 0) t.accumulate(an, g);
                if (bn >= 0) t.accumulate(bn, g);
              });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.values());
  for (size_t i = 0; i < out.size(); ++i) out[i] -= b.values()[i];
  Tape* tape = common_tape({&a, &b});
  const int an = a.node(), bn = b.node();
  return emit(tape, a.shape(), std::move(out), {an, bn},
              [an, bn](const std::vector<double>& g, Tape& t) {
                if (an >= 0) t.accumulate(an, g);
                if (bn >= 0) {
                  std::vector<double> neg(g.size());
                  for (size_t i = 0; i < g.size(); ++i) neg[i] = -g[i];
                  t.accumulate(bn, neg);
                }
              });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.values());
  for (size_t i = 0; i < out.size(); ++i) out[i] *= b.values()[i];
  Tape* tape = common_tape({&a, &b});
  const int an = a.node(), bn = b.node();
  auto av = a.values();
  auto bv = b.values();
  return emit(tape, a.shape(), std::move(out), {an, bn},
              [an, bn, av = std::move(av), bv = std::move(bv)](
                  const std::vector<double>& g, Tape& t) {
                if (an >= 0) {
                  std::vector<double> da(g.size());
                  for (size_t i = 0; i < g.size(); ++i) da[i] = g[i] * bv[i];
                  t.accumulate(an, da);
                }
                if (bn >= 0) {
                  std::vector<double> db(g.size());
                  for (size_t i = 0; i < g.size(); ++i) db[i] = g[i] * av[i];
                  t.accumulate(bn, db);
                }
              });
}

Tensor scale(const Tensor& a, double c) {
  std::vector<double> out(a.values());
  for (double& v : out) v *= c;
  Tape* tape = common_tape({&a});
  const int an = a.node();
  return emit(tape, a.shape(), std::move(out), {an},
              [an, c](const std::vector<double>& g, Tape& t) {
                if (an < 0) return;
                std::vector<double> da(g.size());
                for (size_t i = 0; i < g.size(); ++i) da[i] = g[i] * c;
                t.accumulate(an, da);
              });
}

Tensor add_rowwise(const Tensor& a, const Tensor& bias) {
  require_rank(a, 2, "add_rowwise");
  require_rank(bias, 1, "add_rowwise");
  const int m = a.dim(0), n = a.dim(1);
  if (bias.dim(0) != n) throw std::invalid_argument("add_rowwise: bias length mismatch");

  std::vector<double> out(a.values());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out[static_cast<size_t>(i * n + j)] += bias.values()[static_cast<size_t>(j)];

  Tape* tape = common_tape({&a, &bias});
  const int an = a.node(), bn = bias.node();
  return emit(tape, {m, n}, std::move(out), {an, bn},
              [an, bn, m, n](const std::vector<double>& g, Tape& t) {
                if (an >= 0) t.accumulate(an, g);
                if (bn >= 0) {
                  std::vector<double> db(static_cast<size_t>(n), 0.0);
                  for (int i = 0; i < m; ++i)
                    for (int j = 0; j < n; ++j) db[static_cast<size_t>(j)] += g[static_cast<size_t>(i * n + j)];
                  t.accumulate(bn, db);
                }
              });
}

Tensor relu(const Tensor& a) {
  std::vector<double> out(a.values());
  for (double& v : out) v = v > 0.0 ? v : 0.0;
  Tape* tape = common_tape({&a});
  const int an = a.node();
  auto av = a.values();
  return emit(tape, a.shape(), std::move(out), {an},
              [an, av = std::move(av)](const std::vector<double>& g, Tape& t) {
                if (an < 0) return;
                std::vector<double> da(g.size());
                for (size_t i = 0; i < g.size(); ++i) da[i] = av[i] > 0.0 ? g[i] : 0.0;
                t.accumulate(an, da);
              });
}

Tensor log(const Tensor& a) {
  std::vector<double> out(a.values());
  for (double& v : out) v = std::log(v);
  Tape* tape = common_tape({&a});
  const int an = a.node();
  auto av = a.values();
  return emit(tape, a.shape(), std::move(out), {an},
              [an, av = std::move(av)](const std::vector<double>& g, Tape& t) {
                if (an < 0) return;
                std::vector<double> da(g.size());
                for (size_t i = 0; i < g.size(); ++i) da[i] = g[i] / av[i];
                t.accumulate(an, da);
              });
}

Tensor reduce_axis(const Tensor& a, int axis, Reduce kind) {
  if (axis < 0 || axis >= a.rank()) throw std::invalid_argument("reduce_axis: axis out of range");
  int outer = 1, inner = 1;
  const int extent = a.dim(axis);
  for (int i = 0; i < axis; ++i) outer *= a.dim(i);
  for (int i = axis + 1; i < a.rank(); ++i) inner *= a.dim(i);

  std::vector<int> out_shape;
  for (int i = 0; i < a.rank(); ++i)
    if (i != axis) out_shape.push_back(a.dim(i));
  if (out_shape.empty()) out_shape.push_back(1);

  const auto& av = a.values();
  std::vector<double> out(static_cast<size_t>(outer) * static_cast<size_t>(inner));
  std::vector<int> argmax;
  if (kind == Reduce::Max) argmax.resize(out.size());

  for (int o = 0; o < outer; ++o) {
    for (int in = 0; in < inner; ++in) {
      const size_t oi = static_cast<size_t>(o * inner + in);
      if (kind == Reduce::Max) {
        double best = av[static_cast<size_t>((o * extent) * inner + in)];
        int best_e = 0;
        for (int e = 1; e < extent; ++e) {
          const double v = av[static_cast<size_t>((o * extent + e) * inner + in)];
          if (v > best) {  // strict >: ties keep the lowest index
            best = v;
            best_e = e;
          }
        }
        out[oi] = best;
        argmax[oi] = best_e;
      } else {
        double acc = 0.0;
        for (int e = 0; e < extent; ++e) acc += av[static_cast<size_t>((o * extent + e) * inner + in)];
        out[oi] = kind == Reduce::Mean ? acc / extent : acc;
      }
    }
  }

  Tape* tape = common_tape({&a});
  const int an = a.node();
  const size_t a_size = av.size();
  return emit(tape, std::move(out_shape), std::move(out), {an},
              [an, kind, outer, inner, extent, a_size, argmax = std::move(argmax)](
                  const std::vector<double>& g, Tape& t) {
                if (an < 0) return;
                std::vector<double> da(a_size, 0.0);
                for (int o = 0; o < outer; ++o) {
                  for (int in = 0; in < inner; ++in) {
                    const size_t oi = static_cast<size_t>(o * inner + in);
                    if (kind == Reduce::Max) {
                      da[static_cast<size_t>((o * extent + argmax[oi]) * inner + in)] = g[oi];
                    } else {
                      const double share = kind == Reduce::Mean ? g[oi] / extent : g[oi];
                      for (int e = 0; e < extent; ++e)
                        da[static_cast<size_t>((o * extent + e) * inner + in)] += share;
                    }
                  }
                }
                t.accumulate(an, da);
              });
}

Tensor reduce_all_sum(const Tensor& a) {
  double acc = 0.0;
  for (double v : a.values()) acc += v;
  Tape* tape = common_tape({&a});
  const int an = a.node();
  const size_t a_size = a.values().size();
  return emit(tape, {1}, {acc}, {an},
              [an, a_size](const std::vector<double>& g, Tape& t) {
                if (an < 0) return;
                t.accumulate(an, std::vector<double>(a_size, g[0]));
              });
}

Tensor reshape(const Tensor& a, std::vector<int> new_shape) {
  if (detail::shape_numel(new_shape) != a.numel()) {
    throw std::invalid_argument("reshape: element count mismatch");
  }
  Tape* tape = common_tape({&a});
  const int an = a.node();
  return emit(tape, std::move(new_shape), a.values(), {an},
              [an](const std::vector<double>& g, Tape& t) {
                if (an >= 0) t.accumulate(an, g);
              });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "concat_cols");
  require_rank(b, 2, "concat_cols");
  if (a.dim(0) != b.dim(0)) throw std::invalid_argument("concat_cols: row count mismatch");
  const int m = a.dim(0), p = a.dim(1), q = b.dim(1);

  std::vector<double> out(static_cast<size_t>(m) * static_cast<size_t>(p + q));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < p; ++j) out[static_cast<size_t>(i * (p + q) + j)] = a.values()[static_cast<size_t>(i * p + j)];
    for (int j = 0; j < q; ++j) out[static_cast<size_t>(i * (p + q) + p + j)] = b.values()[static_cast<size_t>(i * q + j)];
  }

  Tape* tape = common_tape({&a, &b});
  const int an = a.node(), bn = b.node();
  return emit(tape, {m, p + q}, std::move(out), {an, bn},
              [an, bn, m, p, q](const std::vector<double>& g, Tape& t) {
                if (an >= 0) {
                  std::vector<double> da(static_cast<size_t>(m) * static_cast<size_t>(p));
                  for (int i = 0; i < m; ++i)
                    for (int j = 0; j < p; ++j) da[static_cast<size_t>(i * p + j)] = g[static_cast<size_t>(i * (p + q) + j)];
                  t.accumulate(an, da);
                }
                if (bn >= 0) {
                  std::vector<double> db(static_cast<size_t>(m) * static_cast<size_t>(q));
                  for (int i = 0; i < m; ++i)
                    for (int j = 0; j < q; ++j) db[static_cast<size_t>(i * q + j)] = g[static_cast<size_t>(i * (p + q) + p + j)];
                  t.accumulate(bn, db);
                }
              });
}

Tensor stack_rows(const std::vector<Tensor>& rows) {
  if (rows.empty()) throw std::invalid_argument("stack_rows: no rows");
  const int d = rows.front().numel();
  for (const Tensor& r : rows) {
    if (r.rank() != 1 || r.numel() != d) {
      throw std::invalid_argument("stack_rows: rows must be rank-1 of equal length");
    }
  }
  const int b = static_cast<int>(rows.size());
  std::vector<double> out;
  out.reserve(static_cast<size_t>(b) * static_cast<size_t>(d));
  std::vector<int> nodes;
  nodes.reserve(rows.size());
  std::vector<const Tensor*> ptrs;
  for (const Tensor& r : rows) {
    out.insert(out.end(), r.values().begin(), r.values().end());
    ptrs.push_back(&r);
  }
  Tape* tape = nullptr;
  for (const Tensor* r : ptrs) {
    if (!r->on_tape()) continue;
    if (tape == nullptr) tape = r->tape();
    else if (tape != r->tape()) throw std::logic_error("op inputs belong to different tapes");
  }
  for (const Tensor& r : rows) nodes.push_back(r.node());
  auto nodes_copy = nodes;
  return emit(tape, {b, d}, std::move(out), std::move(nodes),
              [row_nodes = std::move(nodes_copy), d](const std::vector<double>& g, Tape& t) {
                for (size_t i = 0; i < row_nodes.size(); ++i) {
                  if (row_nodes[i] < 0) continue;
                  std::vector<double> dr(g.begin() + static_cast<long>(i) * d,
                                         g.begin() + static_cast<long>(i + 1) * d);
                  t.accumulate(row_nodes[i], dr);
                }
              });
}

Tensor gather_rows(const Tensor& a, const std::vector<int>& idx) {
  require_rank(a, 2, "gather_rows");
  const int m = a.dim(0), d = a.dim(1);
  for (int i : idx) {
    if (i < 0 || i >= m) throw std::invalid_argument("gather_rows: index out of range");
  }
  const int r = static_cast<int>(idx.size());
  std::vector<double> out(static_cast<size_t>(r) * static_cast<size_t>(d));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < d; ++j)
      out[static_cast<size_t>(i * d + j)] = a.values()[static_cast<size_t>(idx[static_cast<size_t>(i)] * d + j)];

  Tape* tape = common_tape({&a});
  const int an = a.node();
  const size_t a_size = a.values().size();
  return emit(tape, {r, d}, std::move(out), {an},
              [an, idx, d, a_size](const std::vector<double>& g, Tape& t) {
                if (an < 0) return;
                std::vector<double> da(a_size, 0.0);
                for (size_t i = 0; i < idx.size(); ++i)
                  for (int j = 0; j < d; ++j)
                    da[static_cast<size_t>(idx[i] * d + j)] += g[i * static_cast<size_t>(d) + static_cast<size_t>(j)];
                t.accumulate(an, da);
              });
}

Tensor slice_cols(const Tensor& a, int begin, int end) {
  require_rank(a, 2, "slice_cols");
  const int m = a.dim(0), n = a.dim(1);
  if (begin < 0 || end > n || begin >= end) throw std::invalid_argument("slice_cols: bad range");
  const int w = end - begin;
  std::vector<double> out(static_cast<size_t>(m) * static_cast<size_t>(w));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < w; ++j)
      out[static_cast<size_t>(i * w + j)] = a.values()[static_cast<size_t>(i * n + begin + j)];

  Tape* tape = common_tape({&a});
  const int an = a.node();
  return emit(tape, {m, w}, std::move(out), {an},
              [an, m, n, w, begin](const std::vector<double>& g, Tape& t) {
                if (an < 0) return;
                std::vector<double> da(static_cast<size_t>(m) * static_cast<size_t>(n), 0.0);
                for (int i = 0; i < m; ++i)
                  for (int j = 0; j < w; ++j)
                    da[static_cast<size_t>(i * n + begin + j)] = g[static_cast<size_t>(i * w + j)];
                t.accumulate(an, da);
              });
}

// ---------------------------------------------------------------------------
// Softmax family
// ---------------------------------------------------------------------------

namespace {

void check_tau(double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("temperature must be positive");
}

// One row of stabilized softmax: p_i = exp((x_i - max)/tau) / sum.
void softmax_row(const double* x, int c, double tau, double* p) {
  double m = x[0];
  for (int i = 1; i < c; ++i) m = std::max(m, x[i]);
  double s = 0.0;
  for (int i = 0; i < c; ++i) {
    p[i] = std::exp((x[i] - m) / tau);
    s += p[i];
  }
  for (int i = 0; i < c; ++i) p[i] /= s;
}

void log_softmax_row(const double* x, int c, double tau, double* y) {
  double m = x[0];
  for (int i = 1; i < c; ++i) m = std::max(m, x[i]);
  double s = 0.0;
  for (int i = 0; i < c; ++i) s += std::exp((x[i] - m) / tau);
  const double lse = std::log(s);
  for (int i = 0; i < c; ++i) y[i] = (x[i] - m) / tau - lse;
}

}  // namespace

Tensor softmax_with_temperature(const Tensor& logits, double tau) {
  check_tau(tau);
  if (logits.rank() != 1 || logits.numel() < 1) {
    throw std::invalid_argument("softmax_with_temperature: logits must be a non-empty vector");
  }
  const int c = logits.numel();
  std::vector<double> out(static_cast<size_t>(c));
  softmax_row(logits.values().data(), c, tau, out.data());

  Tape* tape = common_tape({&logits});
  const int ln = logits.node();
  auto probs = out;
  return emit(tape, {c}, std::move(out), {ln},
              [ln, probs = std::move(probs), tau, c](const std::vector<double>& g, Tape& t) {
                if (ln < 0) return;
                double dot = 0.0;
                for (int i = 0; i < c; ++i) dot += g[static_cast<size_t>(i)] * probs[static_cast<size_t>(i)];
                std::vector<double> da(static_cast<size_t>(c));
                for (int i = 0; i < c; ++i)
                  da[static_cast<size_t>(i)] = probs[static_cast<size_t>(i)] * (g[static_cast<size_t>(i)] - dot) / tau;
                t.accumulate(ln, da);
              });
}

Tensor softmax_rows(const Tensor& logits, double tau) {
  check_tau(tau);
  require_rank(logits, 2, "softmax_rows");
  const int n = logits.dim(0), c = logits.dim(1);
  std::vector<double> out(logits.values().size());
  for (int r = 0; r < n; ++r)
    softmax_row(logits.values().data() + r * c, c, tau, out.data() + r * c);

  Tape* tape = common_tape({&logits});
  const int ln = logits.node();
  auto probs = out;
  return emit(tape, {n, c}, std::move(out), {ln},
              [ln, probs = std::move(probs), tau, n, c](const std::vector<double>& g, Tape& t) {
                if (ln < 0) return;
                std::vector<double> da(probs.size());
                for (int r = 0; r < n; ++r) {
                  double dot = 0.0;
                  for (int i = 0; i < c; ++i)
                    dot += g[static_cast<size_t>(r * c + i)] * probs[static_cast<size_t>(r * c + i)];
                  for (int i = 0; i < c; ++i)
                    da[static_cast<size_t>(r * c + i)] =
                        probs[static_cast<size_t>(r * c + i)] *
                        (g[static_cast<size_t>(r * c + i)] - dot) / tau;
                }
                t.accumulate(ln, da);
              });
}

Tensor log_softmax_rows(const Tensor& logits, double tau) {
  check_tau(tau);
  require_rank(logits, 2, "log_softmax_rows");
  const int n = logits.dim(0), c = logits.dim(1);
  std::vector<double> out(logits.values().size());
  for (int r = 0; r < n; ++r)
    log_softmax_row(logits.values().data() + r * c, c, tau, out.data() + r * c);

  Tape* tape = common_tape({&logits});
  const int ln = logits.node();
  auto logp = out;
  return emit(tape, {n, c}, std::move(out), {ln},
              [ln, logp = std::move(logp), tau, n, c](const std::vector<double>& g, Tape& t) {
                if (ln < 0) return;
                std::vector<double> da(logp.size());
                for (int r = 0; r < n; ++r) {
                  double gsum = 0.0;
                  for (int i = 0; i < c; ++i) gsum += g[static_cast<size_t>(r * c + i)];
                  for (int i = 0; i < c; ++i) {
                    const double p = std::exp(logp[static_cast<size_t>(r * c + i)]);
                    da[static_cast<size_t>(r * c + i)] =
                        (g[static_cast<size_t>(r * c + i)] - p * gsum) / tau;
                  }
                }
                t.accumulate(ln, da);
              });
}

Tensor nll_loss(const Tensor& log_probs, const std::vector<int>& labels) {
  require_rank(log_probs, 2, "nll_loss");
  const int n = log_probs.dim(0), c = log_probs.dim(1);
  if (static_cast<int>(labels.size()) != n) {
    throw std::invalid_argument("nll_loss: label count must match rows");
  }
  for (int y : labels) {
    if (y < 0 || y >= c) throw std::invalid_argument("nll_loss: label out of range");
  }
  double acc = 0.0;
  for (int r = 0; r < n; ++r) acc -= log_probs.values()[static_cast<size_t>(r * c + labels[static_cast<size_t>(r)])];
  acc /= n;

  Tape* tape = common_tape({&log_probs});
  const int ln = log_probs.node();
  const size_t sz = log_probs.values().size();
  return emit(tape, {1}, {acc}, {ln},
              [ln, labels, n, c, sz](const std::vector<double>& g, Tape& t) {
                if (ln < 0) return;
                std::vector<double> da(sz, 0.0);
                for (int r = 0; r < n; ++r)
                  da[static_cast<size_t>(r * c + labels[static_cast<size_t>(r)])] = -g[0] / n;
                t.accumulate(ln, da);
              });
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

Adam::Adam(std::vector<Param*> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (Param* p : params_) {
    m_.emplace_back(p->value.size(), 0.0);
    v_.emplace_back(p->value.size(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (size_t pi = 0; pi < params_.size(); ++pi) {
    Param& p = *params_[pi];
    if (p.grad.size() != p.value.size()) {
      throw std::invalid_argument("adam: grad/value size mismatch");
    }
    auto& m = m_[pi];
    auto& v = v_[pi];
    for (size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p.value[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

}  // namespace pointclimb
