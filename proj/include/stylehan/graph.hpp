#pragma once

// Reverse-mode tape. A Graph records every op executed during one forward
// pass; backward() sweeps the record once in reverse. Graphs are confined to
// one worker. Parameters are read through a shared BasicParams and their
// gradients land in a per-graph Gradients sink, so independent graphs over the
// same parameters can run concurrently.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stylehan/kernels.hpp"
#include "stylehan/params.hpp"
#include "stylehan/tensor.hpp"

namespace stylehan {

struct Var {
  std::uint32_t id = 0;
};

enum class Activation { relu, tanh, sigmoid };

template <class T>
class Graph {
 public:
  using Backward = std::function<void(Graph&, Var out)>;

  explicit Graph(const BasicParams<T>* params = nullptr, Gradients<T>* sink = nullptr)
      : params_(params), sink_(sink), param_vars_(params ? params->size() : 0, kNone) {}

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  const BasicParams<T>* params() const { return params_; }
  Gradients<T>* sink() const { return sink_; }

  Var constant(Shape shape, std::vector<T> value) {
    return emit("constant", std::move(shape), std::move(value), false, nullptr);
  }

  Var zeros(Shape shape) {
    std::vector<T> v(num_elements(shape), T{0});
    return constant(std::move(shape), std::move(v));
  }

  // Leaf whose gradient is readable through grad() after backward().
  Var input(Shape shape, std::vector<T> value, bool requires_grad = true) {
    return emit("input", std::move(shape), std::move(value), requires_grad, nullptr);
  }

  Var input(const BasicTensor<T>& t, bool requires_grad = true) {
    return input(t.shape(), t.storage(), requires_grad);
  }

  // Leaf viewing parameter `index`; repeated calls return the same Var.
  Var param(std::size_t index) {
    if (!params_ || index >= params_->size()) throw IndexError("parameter index out of range");
    if (param_vars_[index] != kNone) return Var{param_vars_[index]};
    Node node;
    node.shape = params_->values[index].shape();
    node.view = params_->values[index].storage().data();
    node.size = params_->values[index].size();
    node.needs_grad = sink_ != nullptr && params_->specs[index].trainable;
    node.param = static_cast<int>(index);
    nodes_.push_back(std::move(node));
    param_vars_[index] = static_cast<std::uint32_t>(nodes_.size() - 1);
    return Var{param_vars_[index]};
  }

  bool param_trainable(std::size_t index) const {
    return sink_ != nullptr && params_->specs[index].trainable;
  }

  // Records an op output. Values are checked for finiteness; the backward
  // closure is kept only when some input requires a gradient.
  Var emit(std::string_view op, Shape shape, std::vector<T> value, bool needs_grad, Backward backward) {
    if (value.size() != num_elements(shape))
      throw DimensionError(std::string(op) + ": value length does not match shape " + shape_to_string(shape));
    for (T v : value)
      if (!std::isfinite(v)) throw NonFiniteError("non-finite value produced by op '" + std::string(op) + "'");
    Node node;
    node.shape = std::move(shape);
    node.value = std::move(value);
    node.size = node.value.size();
    node.needs_grad = needs_grad;
    if (needs_grad) node.backward = std::move(backward);
    nodes_.push_back(std::move(node));
    return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
  }

  const Shape& shape(Var v) const { return nodes_.at(v.id).shape; }
  std::size_t size(Var v) const { return nodes_.at(v.id).size; }
  const T* data(Var v) const { return nodes_.at(v.id).data(); }
  std::span<const T> values(Var v) const { return {data(v), size(v)}; }
  std::vector<T> to_vector(Var v) const { return {data(v), data(v) + size(v)}; }
  T scalar(Var v) const { return data(v)[0]; }
  bool needs_grad(Var v) const { return nodes_.at(v.id).needs_grad; }
  std::size_t node_count() const { return nodes_.size(); }

  // Gradient buffer of v, allocated as zeros on first access.
  std::span<T> grad(Var v) {
    Node& n = nodes_.at(v.id);
    if (n.grad.size() != n.size) n.grad.assign(n.size, T{0});
    return n.grad;
  }

  void backward(Var loss) {
    if (backward_done_) throw std::logic_error("backward already run on this graph");
    if (size(loss) != 1) throw DimensionError("backward requires a scalar loss, got shape " + shape_to_string(shape(loss)));
    backward_done_ = true;
    if (!needs_grad(loss)) return;
    grad(loss)[0] = T{1};
    for (std::uint32_t i = loss.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.needs_grad || n.grad.empty()) continue;
      if (n.backward) {
        auto fn = std::move(n.backward);
        n.backward = nullptr;
        fn(*this, Var{i});
      }
    }
    flush_param_grads();
  }

  // Ops record their discrete branch decisions (relu signs, argmax positions,
  // clamps) here so a finite-difference check can detect kink crossings.
  void note_kink(std::uint64_t v) { kinks_ = (kinks_ ^ v) * 1099511628211ull + 0x9e3779b97f4a7c15ull; }
  std::uint64_t kink_signature() const { return kinks_; }

 private:
  static constexpr std::uint32_t kNone = ~0u;

  struct Node {
    Shape shape;
    std::vector<T> value;
    const T* view = nullptr;
    std::size_t size = 0;
    std::vector<T> grad;
    Backward backward;
    bool needs_grad = false;
    int param = -1;

    const T* data() const { return view ? view : value.data(); }
  };

  void flush_param_grads() {
    if (!sink_) return;
    for (std::size_t p = 0; p < param_vars_.size(); ++p) {
      if (param_vars_[p] == kNone) continue;
      const Node& n = nodes_[param_vars_[p]];
      if (n.grad.empty() || !n.needs_grad) continue;
      auto& dst = sink_->dense_for(p, n.size);
      std::size_t start = 0;
      if (params_->specs[p].table) start = n.shape.back();  // PAD row stays frozen
      for (std::size_t i = start; i < n.size; ++i) dst[i] += n.grad[i];
    }
  }

  const BasicParams<T>* params_;
  Gradients<T>* sink_;
  std::vector<std::uint32_t> param_vars_;
  std::vector<Node> nodes_;
  std::uint64_t kinks_ = 1469598103934665603ull;
  bool backward_done_ = false;
};

namespace ops {

namespace detail {

inline void require(bool ok, const std::string& message) {
  if (!ok) throw DimensionError(message);
}

template <class T>
bool any_grad(const Graph<T>& g, std::initializer_list<Var> vars) {
  for (Var v : vars)
    if (g.needs_grad(v)) return true;
  return false;
}

template <class T>
std::size_t rows(const Graph<T>& g, Var v) {
  return g.shape(v).at(0);
}

template <class T>
std::size_t cols(const Graph<T>& g, Var v) {
  return g.shape(v).at(1);
}

}  // namespace detail

/// a[m×k] · b[k×n]
template <class T>
Var matmul(Graph<T>& g, Var a, Var b) {
  const Shape& sa = g.shape(a);
  const Shape& sb = g.shape(b);
  detail::require(sa.size() == 2 && sb.size() == 2 && sa[1] == sb[0],
                  "matmul: incompatible shapes " + shape_to_string(sa) + " and " + shape_to_string(sb));
  const std::size_t m = sa[0], k = sa[1], n = sb[1];
  std::vector<T> out(m * n);
  kernels::gemm<T>({g.data(a), m, k}, {g.data(b), k, n}, out.data(), false);
  return g.emit("matmul", {m, n}, std::move(out), detail::any_grad(g, {a, b}), [a, b, m, k, n](Graph<T>& g, Var o) {
    const T* go = g.grad(o).data();
    if (g.needs_grad(a)) kernels::gemm<T>({go, m, n}, {g.data(b), k, n, true}, g.grad(a).data(), true);
    if (g.needs_grad(b)) kernels::gemm<T>({g.data(a), m, k, true}, {go, m, n}, g.grad(b).data(), true);
  });
}

/// w[m×k] · x[k]
template <class T>
Var matvec(Graph<T>& g, Var w, Var x) {
  const Shape& sw = g.shape(w);
  detail::require(sw.size() == 2 && g.size(x) == sw[1],
                  "matvec: incompatible shapes " + shape_to_string(sw) + " and " + shape_to_string(g.shape(x)));
  const std::size_t m = sw[0], k = sw[1];
  std::vector<T> out(m);
  kernels::gemm<T>({g.data(w), m, k}, {g.data(x), k, 1}, out.data(), false);
  return g.emit("matvec", {m}, std::move(out), detail::any_grad(g, {w, x}), [w, x, m, k](Graph<T>& g, Var o) {
    const T* go = g.grad(o).data();
    if (g.needs_grad(w)) kernels::gemm<T>({go, m, 1}, {g.data(x), 1, k}, g.grad(w).data(), true);
    if (g.needs_grad(x)) kernels::gemm<T>({g.data(w), m, k, true}, {go, m, 1}, g.grad(x).data(), true);
  });
}

template <class T>
Var add(Graph<T>& g, Var a, Var b) {
  detail::require(g.shape(a) == g.shape(b),
                  "add: shape mismatch " + shape_to_string(g.shape(a)) + " vs " + shape_to_string(g.shape(b)));
  const std::size_t n = g.size(a);
  std::vector<T> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = g.data(a)[i] + g.data(b)[i];
  return g.emit("add", g.shape(a), std::move(out), detail::any_grad(g, {a, b}), [a, b, n](Graph<T>& g, Var o) {
    const T* go = g.grad(o).data();
    for (Var in : {a, b})
      if (g.needs_grad(in)) {
        T* gi = g.grad(in).data();
        for (std::size_t i = 0; i < n; ++i) gi[i] += go[i];
      }
  });
}

template <class T>
Var mul(Graph<T>& g, Var a, Var b) {
  detail::require(g.shape(a) == g.shape(b),
                  "mul: shape mismatch " + shape_to_string(g.shape(a)) + " vs " + shape_to_string(g.shape(b)));
  const std::size_t n = g.size(a);
  std::vector<T> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = g.data(a)[i] * g.data(b)[i];
  return g.emit("mul", g.shape(a), std::move(out), detail::any_grad(g, {a, b}), [a, b, n](Graph<T>& g, Var o) {
    const T* go = g.grad(o).data();
    if (g.needs_grad(a)) {
      T* ga = g.grad(a).data();
      for (std::size_t i = 0; i < n; ++i) ga[i] += go[i] * g.data(b)[i];
    }
    if (g.needs_grad(b)) {
      T* gb = g.grad(b).data();
      for (std::size_t i = 0; i < n; ++i) gb[i] += go[i] * g.data(a)[i];
    }
  });
}

template <class T>
Var scale(Graph<T>& g, Var x, T factor) {
  const std::size_t n = g.size(x);
  std::vector<T> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = g.data(x)[i] * factor;
  return g.emit("scale", g.shape(x), std::move(out), g.needs_grad(x), [x, n, factor](Graph<T>& g, Var o) {
    const T* go = g.grad(o).data();
    T* gx = g.grad(x).data();
    for (std::size_t i = 0; i < n; ++i) gx[i] += go[i] * factor;
  });
}

template <class T>
Var sum(Graph<T>& g, Var x) {
  T acc = T{0};
  for (T v : g.values(x)) acc += v;
  return g.emit("sum", {1}, {acc}, g.needs_grad(x), [x](Graph<T>& g, Var o) {
    const T go = g.grad(o)[0];
    for (T& v : g.grad(x)) v += go;
  });
}

template <class T>
Var dot(Graph<T>& g, Var a, Var b) {
  detail::require(g.size(a) == g.size(b), "dot: length mismatch " + shape_to_string(g.shape(a)) + " vs " +
                                              shape_to_string(g.shape(b)));
  const std::size_t n = g.size(a);
  T acc = T{0};
  for (std::size_t i = 0; i < n; ++i) acc += g.data(a)[i] * g.data(b)[i];
  return g.emit("dot", {1}, {acc}, detail::any_grad(g, {a, b}), [a, b, n](Graph<T>& g, Var o) {
    const T go = g.grad(o)[0];
    if (g.needs_grad(a)) {
      T* ga = g.grad(a).data();
      for (std::size_t i = 0; i < n; ++i) ga[i] += go * g.data(b)[i];
    }
    if (g.needs_grad(b)) {
      T* gb = g.grad(b).data();
      for (std::size_t i = 0; i < n; ++i) gb[i] += go * g.data(a)[i];
    }
  });
}

template <class T>
T sigmoid_value(T x) {
  if (x >= T{0}) return T{1} / (T{1} + std::exp(-x));
  const T e = std::exp(x);
  return e / (T{1} + e);
}

template <class T>
Var activation(Graph<T>& g, Var x, Activation kind) {
  const std::size_t n = g.size(x);
  const T* in = g.data(x);
  std::vector<T> out(n);
  switch (kind) {
    case Activation::relu: {
      std::uint64_t signs = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const bool on = in[i] > T{0};
        out[i] = on ? in[i] : T{0};
        signs = signs * 31 + (on ? 1 : 0) + i;
      }
      g.note_kink(signs);
      break;
    }
    case Activation::tanh:
      for (std::size_t i = 0; i < n; ++i) out[i] = std::tanh(in[i]);
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < n; ++i) out[i] = sigmoid_value(in[i]);
      break;
  }
  return g.emit("activation", g.shape(x), std::move(out), g.needs_grad(x), [x, n, kind](Graph<T>& g, Var o) {
    const T* go = g.grad(o).data();
    const T* y = g.data(o);
    const T* in = g.data(x);
    T* gx = g.grad(x).data();
    for (std::size_t i = 0; i < n; ++i) {
      T d;
      switch (kind) {
        case Activation::relu: d = in[i] > T{0} ? T{1} : T{0}; break;
        case Activation::tanh: d = T{1} - y[i] * y[i]; break;
        default: d = y[i] * (T{1} - y[i]); break;
      }
      gx[i] += go[i] * d;
    }
  });
}

template <class T>
Var relu(Graph<T>& g, Var x) {
  return activation(g, x, Activation::relu);
}
template <class T>
Var tanh(Graph<T>& g, Var x) {
  return activation(g, x, Activation::tanh);
}
template <class T>
Var sigmoid(Graph<T>& g, Var x) {
  return activation(g, x, Activation::sigmoid);
}

/// Max-subtracted softmax over a vector.
template <class T>
Var softmax(Graph<T>& g, Var x) {
  const std::size_t n = g.size(x);
  detail::require(n >= 1, "softmax: empty input");
  const T* in = g.data(x);
  const T mx = *std::max_element(in, in + n);
  std::vector<T> out(n);
  T total = T{0};
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(in[i] - mx);
    total += out[i];
  }
  for (T& v : out) v /= total;
  return g.emit("softmax", g.shape(x), std::move(out), g.needs_grad(x), [x, n](Graph<T>& g, Var o) {
    const T* go = g.grad(o).data();
    const T* y = g.data(o);
    T inner = T{0};
    for (std::size_t i = 0; i < n; ++i) inner += go[i] * y[i];
    T* gx = g.grad(x).data();
    for (std::size_t i = 0; i < n; ++i) gx[i] += y[i] * (go[i] - inner);
  });
}

/// Order-preserving concatenation of flat parts.
template <class T>
Var concat(Graph<T>& g, const std::vector<Var>& parts) {
  detail::require(!parts.empty(), "concat: no parts");
  std::vector<T> out;
  bool needs = false;
  for (Var p : parts) {
    auto v = g.values(p);
    out.insert(out.end(), v.begin(), v.end());
    needs = needs || g.needs_grad(p);
  }
  const std::size_t n = out.size();
  return g.emit("concat", {n}, std::move(out), needs, [parts](Graph<T>& g, Var o) {
    const T* go = g.grad(o).data();
    std::size_t offset = 0;
    for (Var p : parts) {
      const std::size_t len = g.size(p);
      if (g.needs_grad(p)) {
        T* gp = g.grad(p).data();
        for (std::size_t i = 0; i < len; ++i) gp[i] += go[offset + i];
      }
      offset += len;
    }
  });
}

/// [N×d1] ++ [N×d2] -> [N×(d1+d2)]
template <class T>
Var concat_cols(Graph<T>& g, Var a, Var b) {
  detail::require(g.shape(a).size() == 2 && g.shape(b).size() == 2 && g.shape(a)[0] == g.shape(b)[0],
                  "concat_cols: incompatible shapes " + shape_to_string(g.shape(a)) + " and " +
                      shape_to_string(g.shape(b)));
  const std::size_t n = g.shape(a)[0], da = g.shape(a)[1], db = g.shape(b)[1];
  std::vector<T> out(n * (da + db));
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(g.data(a) + i * da, da, out.begin() + i * (da + db));
    std::copy_n(g.data(b) + i * db, db, out.begin() + i * (da + db) + da);
  }
  return g.emit("concat_cols", {n, da + db}, std::move(out), detail::any_grad(g, {a, b}),
                [a, b, n, da, db](Graph<T>& g, Var o) {
                  const T* go = g.grad(o).data();
                  if (g.needs_grad(a)) {
                    T* ga = g.grad(a).data();
                    for (std::size_t i = 0; i < n; ++i)
                      for (std::size_t c = 0; c < da; ++c) ga[i * da + c] += go[i * (da + db) + c];
                  }
                  if (g.needs_grad(b)) {
                    T* gb = g.grad(b).data();
                    for (std::size_t i = 0; i < n; ++i)
                      for (std::size_t c = 0; c < db; ++c) gb[i * db + c] += go[i * (da + db) + da + c];
                  }
                });
}

template <class T>
Var slice(Graph<T>& g, Var x, std::size_t offset, std::size_t length) {
  detail::require(length >= 1 && offset + length <= g.size(x), "slice: range out of bounds");
  std::vector<T> out(g.data(x) + offset, g.data(x) + offset + length);
  return g.emit("slice", {length}, std::move(out), g.needs_grad(x), [x, offset, length](Graph<T>& g, Var o) {
    const T* go = g.grad(o).data();
    T* gx = g.grad(x).data();
    for (std::size_t i = 0; i < length; ++i) gx[offset + i] += go[i];
  });
}

/// Stacks equal-length vectors as the rows of a matrix.
template <class T>
Var stack_rows(Graph<T>& g, const std::vector<Var>& rows) {
  detail::require(!rows.empty(), "stack_rows: no rows");
  const std::size_t d = g.size(rows[0]);
  std::vector<T> out;
  out.reserve(rows.size() * d);
  bool needs = false;
  for (Var r : rows) {
    detail::require(g.size(r) == d, "stack_rows: ragged rows");
    auto v = g.values(r);
    out.insert(out.end(), v.begin(), v.end());
    needs = needs || g.needs_grad(r);
  }
  return g.emit("stack_rows", {rows.size(), d}, std::move(out), needs, [rows, d](Graph<T>& g, Var o) {
    const T* go = g.grad(o).data();
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (g.needs_grad(rows[i])) {
        T* gr = g.grad(rows[i]).data();
        for (std::size_t c = 0; c < d; ++c) gr[c] += go[i * d + c];
      }
  });
}

/// Bank of valid 1-D convolutions over a sentence matrix s[N×d] with filters
/// w[F×r·d] and biases b[F]; output [F×(N−r+1)], no activation.
template <class T>
Var conv_bank(Graph<T>& g, Var s, Var w, Var b) {
  const Shape& ss = g.shape(s);
  const Shape& sw = g.shape(w);
  detail::require(ss.size() == 2, "conv: sentence must be N×d, got " + shape_to_string(ss));
  detail::require(sw.size() == 2 && g.size(b) == sw[0],
                  "conv: filters must be F×(r·d) with F biases, got " + shape_to_string(sw) + " and " +
                      shape_to_string(g.shape(b)));
  const std::size_t n = ss[0], d = ss[1], filters = sw[0];
  detail::require(sw[1] % d == 0 && sw[1] >= d,
                  "conv: filter length " + std::to_string(sw[1]) + " is not a multiple of width " + std::to_string(d));
  const std::size_t r = sw[1] / d;
  if (r > n)
    throw DimensionError("conv: receptive field " + std::to_string(r) + " exceeds sentence length " +
                         std::to_string(n) + " (pad sentences to at least the largest receptive field)");
  const std::size_t len = n - r + 1;
  std::vector<T> out(filters * len);
  kernels::conv_bank_forward(g.data(s), n, d, g.data(w), g.data(b), filters, r, out.data());
  return g.emit("conv", {filters, len}, std::move(out), detail::any_grad(g, {s, w, b}),
                [s, w, b, n, d, filters, r](Graph<T>& g, Var o) {
                  T* ds = g.needs_grad(s) ? g.grad(s).data() : nullptr;
                  T* dw = nullptr;
                  T* db = nullptr;
                  std::vector<T> scratch_w, scratch_b;
                  if (g.needs_grad(w) || g.needs_grad(b)) {
                    if (g.needs_grad(w)) {
                      dw = g.grad(w).data();
                    } else {
                      scratch_w.assign(g.size(w), T{0});
                      dw = scratch_w.data();
                    }
                    if (g.needs_grad(b)) {
                      db = g.grad(b).data();
                    } else {
                      scratch_b.assign(g.size(b), T{0});
                      db = scratch_b.data();
                    }
                  }
                  kernels::conv_bank_backward(g.grad(o).data(), g.data(s), n, d, g.data(w), filters, r, ds, dw, db);
                });
}

/// Single-filter valid convolution: out[j] = dot(w, flatten(s[j..j+r−1])) + b.
template <class T>
Var conv1d_valid(Graph<T>& g, Var s, Var w, Var b) {
  detail::require(g.size(b) == 1, "conv1d_valid: bias must be a scalar");
  const std::size_t rd = g.size(w);
  // Reinterpret the flat filter as a 1×(r·d) bank.
  Var bank = g.emit("reshape", {1, rd}, g.to_vector(w), g.needs_grad(w), [w, rd](Graph<T>& g, Var o) {
    const T* go = g.grad(o).data();
    T* gw = g.grad(w).data();
    for (std::size_t i = 0; i < rd; ++i) gw[i] += go[i];
  });
  Var out = conv_bank(g, s, bank, b);
  const std::size_t len = g.shape(out)[1];
  return g.emit("reshape", {len}, g.to_vector(out), g.needs_grad(out), [out, len](Graph<T>& g, Var o) {
    const T* go = g.grad(o).data();
    T* gi = g.grad(out).data();
    for (std::size_t i = 0; i < len; ++i) gi[i] += go[i];
  });
}

namespace detail {

template <class T>
std::size_t argmax_lowest(const T* v, std::size_t n) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace detail

/// Row-wise max-over-time: c[F×L] -> [F]; gradient routes to the lowest-index argmax.
template <class T>
Var max_over_time_rows(Graph<T>& g, Var c) {
  const Shape& sc = g.shape(c);
  detail::require(sc.size() == 2, "max_over_time_rows: expected a matrix, got " + shape_to_string(sc));
  const std::size_t rows = sc[0], len = sc[1];
  std::vector<T> out(rows);
  std::vector<std::size_t> arg(rows);
  for (std::size_t f = 0; f < rows; ++f) {
    arg[f] = detail::argmax_lowest(g.data(c) + f * len, len);
    out[f] = g.data(c)[f * len + arg[f]];
    g.note_kink(arg[f] + 1000003 * f);
  }
  return g.emit("max_over_time", {rows}, std::move(out), g.needs_grad(c),
                [c, len, arg = std::move(arg)](Graph<T>& g, Var o) {
                  const T* go = g.grad(o).data();
                  T* gc = g.grad(c).data();
                  for (std::size_t f = 0; f < arg.size(); ++f) gc[f * len + arg[f]] += go[f];
                });
}

template <class T>
Var max_over_time(Graph<T>& g, Var c) {
  const std::size_t len = g.size(c);
  if (len == 0) throw DimensionError("max_over_time: empty input");
  const std::size_t arg = detail::argmax_lowest(g.data(c), len);
  g.note_kink(arg);
  return g.emit("max_over_time", {1}, {g.data(c)[arg]}, g.needs_grad(c), [c, arg](Graph<T>& g, Var o) {
    g.grad(c)[arg] += g.grad(o)[0];
  });
}

/// Row `id` of embedding-table parameter `table`. Row 0 of a table is the
/// PAD row: it always reads as zeros and never receives gradient.
template <class T>
Var embedding_lookup(Graph<T>& g, std::size_t table, std::size_t id);

/// Rows `ids` of embedding-table parameter `table` as an [ids×d] matrix.
template <class T>
Var embedding_rows(Graph<T>& g, std::size_t table, const std::vector<std::size_t>& ids) {
  const BasicParams<T>* params = g.params();
  if (!params || table >= params->size()) throw IndexError("embedding: unknown table parameter");
  const auto& tbl = params->values[table];
  detail::require(tbl.rank() == 2, "embedding: table must be a matrix");
  const bool pad = params->specs[table].table;
  const std::size_t vocab = tbl.dim(0), d = tbl.dim(1);
  detail::require(!ids.empty(), "embedding: no ids");
  std::vector<T> out(ids.size() * d, T{0});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= vocab)
      throw IndexError("embedding: id " + std::to_string(ids[i]) + " out of range for table of " +
                       std::to_string(vocab) + " rows");
    if (pad && ids[i] == 0) continue;
    std::copy_n(tbl.storage().data() + ids[i] * d, d, out.begin() + i * d);
  }
  return g.emit("embedding", {ids.size(), d}, std::move(out), g.param_trainable(table),
                [table, ids, d, pad](Graph<T>& g, Var o) {
                  const T* go = g.grad(o).data();
                  for (std::size_t i = 0; i < ids.size(); ++i) {
                    if (pad && ids[i] == 0) continue;
                    auto& row = g.sink()->row_for(table, ids[i], d);
                    for (std::size_t c = 0; c < d; ++c) row[c] += go[i * d + c];
                  }
                });
}

template <class T>
Var embedding_lookup(Graph<T>& g, std::size_t table, std::size_t id) {
  Var rows = embedding_rows(g, table, {id});
  const std::size_t d = g.size(rows);
  return g.emit("reshape", {d}, g.to_vector(rows), g.needs_grad(rows), [rows, d](Graph<T>& g, Var o) {
    const T* go = g.grad(o).data();
    T* gr = g.grad(rows).data();
    for (std::size_t i = 0; i < d; ++i) gr[i] += go[i];
  });
}

/// out = Σ_i alpha[i] · x[i, :]
template <class T>
Var weighted_sum_rows(Graph<T>& g, Var alpha, Var x) {
  const Shape& sx = g.shape(x);
  detail::require(sx.size() == 2 && g.size(alpha) == sx[0],
                  "weighted_sum_rows: incompatible shapes " + shape_to_string(g.shape(alpha)) + " and " +
                      shape_to_string(sx));
  const std::size_t rows = sx[0], d = sx[1];
  std::vector<T> out(d, T{0});
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t c = 0; c < d; ++c) out[c] += g.data(alpha)[i] * g.data(x)[i * d + c];
  return g.emit("weighted_sum_rows", {d}, std::move(out), detail::any_grad(g, {alpha, x}),
                [alpha, x, rows, d](Graph<T>& g, Var o) {
                  const T* go = g.grad(o).data();
                  if (g.needs_grad(alpha)) {
                    T* ga = g.grad(alpha).data();
                    for (std::size_t i = 0; i < rows; ++i) {
                      T acc = T{0};
                      for (std::size_t c = 0; c < d; ++c) acc += go[c] * g.data(x)[i * d + c];
                      ga[i] += acc;
                    }
                  }
                  if (g.needs_grad(x)) {
                    T* gx = g.grad(x).data();
                    for (std::size_t i = 0; i < rows; ++i)
                      for (std::size_t c = 0; c < d; ++c) gx[i * d + c] += g.data(alpha)[i] * go[c];
                  }
                });
}

/// One LSTM step from gate pre-activations z = [i; f; o; g] (each H) and the
/// previous cell state. Returns [h; c].
template <class T>
Var lstm_cell(Graph<T>& g, Var z, Var c_prev) {
  const std::size_t hidden = g.size(c_prev);
  detail::require(g.size(z) == 4 * hidden, "lstm_cell: gate vector " + shape_to_string(g.shape(z)) +
                                               " does not match cell size " + std::to_string(hidden));
  const T* zz = g.data(z);
  const T* cp = g.data(c_prev);
  std::vector<T> out(2 * hidden);
  for (std::size_t k = 0; k < hidden; ++k) {
    const T ig = sigmoid_value(zz[k]);
    const T fg = sigmoid_value(zz[hidden + k]);
    const T og = sigmoid_value(zz[2 * hidden + k]);
    const T cand = std::tanh(zz[3 * hidden + k]);
    const T c = fg * cp[k] + ig * cand;
    out[hidden + k] = c;
    out[k] = og * std::tanh(c);
  }
  return g.emit("lstm_cell", {2 * hidden}, std::move(out), detail::any_grad(g, {z, c_prev}),
                [z, c_prev, hidden](Graph<T>& g, Var o) {
                  const T* go = g.grad(o).data();
                  const T* zz = g.data(z);
                  const T* cp = g.data(c_prev);
                  const T* y = g.data(o);
                  T* gz = g.needs_grad(z) ? g.grad(z).data() : nullptr;
                  T* gc = g.needs_grad(c_prev) ? g.grad(c_prev).data() : nullptr;
                  for (std::size_t k = 0; k < hidden; ++k) {
                    const T ig = sigmoid_value(zz[k]);
                    const T fg = sigmoid_value(zz[hidden + k]);
                    const T og = sigmoid_value(zz[2 * hidden + k]);
                    const T cand = std::tanh(zz[3 * hidden + k]);
                    const T tc = std::tanh(y[hidden + k]);
                    const T dh = go[k];
                    const T dc = go[hidden + k] + dh * og * (T{1} - tc * tc);
                    if (gz) {
                      gz[k] += dc * cand * ig * (T{1} - ig);
                      gz[hidden + k] += dc * cp[k] * fg * (T{1} - fg);
                      gz[2 * hidden + k] += dh * tc * og * (T{1} - og);
                      gz[3 * hidden + k] += dc * ig * (T{1} - cand * cand);
                    }
                    if (gc) gc[k] += dc * fg;
                  }
                });
}

inline constexpr double kProbabilityFloor = 1e-12;

/// −log(max(p[label], 1e-12))
template <class T>
Var nll(Graph<T>& g, Var probs, std::size_t label) {
  if (label >= g.size(probs))
    throw IndexError("nll: label " + std::to_string(label) + " out of range for " + std::to_string(g.size(probs)) +
                     " classes");
  const T p = g.data(probs)[label];
  const bool clamped = !(p > static_cast<T>(kProbabilityFloor));
  g.note_kink(clamped ? 7 : 11);
  const T value = -std::log(clamped ? static_cast<T>(kProbabilityFloor) : p);
  return g.emit("nll", {1}, {value}, g.needs_grad(probs), [probs, label, clamped](Graph<T>& g, Var o) {
    if (clamped) return;
    g.grad(probs)[label] -= g.grad(o)[0] / g.data(probs)[label];
  });
}

}  // namespace ops
}  // namespace stylehan
