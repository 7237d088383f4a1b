#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "stylehan/tensor.hpp"

namespace stylehan {

struct ParamSpec {
  std::string name;
  Shape shape;
  bool table = false;      // embedding table: row 0 is the frozen PAD row, gradients are row-sparse
  bool trainable = true;
};

/// Named, ordered parameter storage. Enumeration order is the index order.
template <class T>
struct BasicParams {
  std::vector<ParamSpec> specs;
  std::vector<BasicTensor<T>> values;

  std::size_t size() const { return specs.size(); }

  std::size_t add(ParamSpec spec) {
    values.emplace_back(spec.shape);
    specs.push_back(std::move(spec));
    return specs.size() - 1;
  }

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < specs.size(); ++i)
      if (specs[i].name == name) return i;
    throw IndexError("no parameter named '" + name + "'");
  }

  std::size_t total_elements() const {
    std::size_t n = 0;
    for (const auto& v : values) n += v.size();
    return n;
  }

  template <class U>
  BasicParams<U> cast() const {
    BasicParams<U> out;
    out.specs = specs;
    for (const auto& v : values) out.values.push_back(v.template cast<U>());
    return out;
  }
};

using ParamSet = BasicParams<float>;

/// Gradient sink for one forward/backward evaluation. Dense buffers are
/// allocated on first touch; embedding tables collect touched rows only.
template <class T>
struct Gradients {
  std::vector<std::vector<T>> dense;
  std::vector<std::map<std::size_t, std::vector<T>>> rows;

  Gradients() = default;
  explicit Gradients(std::size_t param_count) : dense(param_count), rows(param_count) {}

  std::vector<T>& dense_for(std::size_t param, std::size_t size) {
    auto& buf = dense[param];
    if (buf.empty()) buf.assign(size, T{0});
    return buf;
  }

  std::vector<T>& row_for(std::size_t param, std::size_t row, std::size_t width) {
    auto& buf = rows[param][row];
    if (buf.empty()) buf.assign(width, T{0});
    return buf;
  }

  // Adds this sink into full-size per-parameter buffers.
  void add_to(std::vector<std::vector<T>>& full, const BasicParams<T>& params) const {
    for (std::size_t p = 0; p < dense.size(); ++p) {
      auto& dst = full[p];
      if (dst.size() != params.values[p].size()) dst.assign(params.values[p].size(), T{0});
      if (!dense[p].empty())
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += dense[p][i];
      if (!rows[p].empty()) {
        const std::size_t width = params.values[p].shape().back();
        for (const auto& [row, g] : rows[p])
          for (std::size_t c = 0; c < width; ++c) dst[row * width + c] += g[c];
      }
    }
  }

  std::vector<std::vector<T>> to_full(const BasicParams<T>& params) const {
    std::vector<std::vector<T>> full(params.size());
    add_to(full, params);
    return full;
  }
};

}  // namespace stylehan
