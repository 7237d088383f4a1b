#pragma once

// Dense kernels behind the tape ops. Each kernel has a serial reference
// version and an OpenMP version. Both compute every output element with the
// same summation order, so their results are bitwise identical; the OpenMP
// version only distributes independent output rows across workers.

#include <cstddef>
#include <vector>

#include "stylehan/parallel.hpp"

namespace stylehan::kernels {

// Row-major matrix view; `trans` reads the stored matrix transposed.
template <class T>
struct MatView {
  const T* data;
  std::size_t rows;  // stored rows
  std::size_t cols;  // stored cols
  bool trans = false;

  std::size_t out_rows() const { return trans ? cols : rows; }
  std::size_t out_cols() const { return trans ? rows : cols; }
  T operator()(std::size_t i, std::size_t j) const {
    return trans ? data[j * cols + i] : data[i * cols + j];
  }
};

namespace detail {

inline constexpr std::size_t kLanes = 8;

// Dot product in a fixed order: kLanes interleaved partial sums, combined
// left to right, then the tail. Fixed order keeps results reproducible while
// letting the compiler vectorize the lane loop.
template <class T>
inline T dot_lanes(const T* x, const T* y, std::size_t k) {
  T lane[kLanes] = {};
  std::size_t p = 0;
  for (; p + kLanes <= k; p += kLanes)
    for (std::size_t l = 0; l < kLanes; ++l) lane[l] += x[p + l] * y[p + l];
  T acc = T{0};
  for (std::size_t l = 0; l < kLanes; ++l) acc += lane[l];
  for (; p < k; ++p) acc += x[p] * y[p];
  return acc;
}

// op(a) as contiguous rows and op(b) as contiguous columns, so every output
// element is one dot_lanes call.
template <class T>
struct PackedOperands {
  std::size_t m = 0, n = 0, k = 0;
  const T* rows = nullptr;  // m × k
  const T* cols = nullptr;  // n × k
  std::vector<T> row_buf, col_buf;
};

template <class T>
PackedOperands<T> pack(const MatView<T>& a, const MatView<T>& b) {
  PackedOperands<T> p;
  p.m = a.out_rows();
  p.k = a.out_cols();
  p.n = b.out_cols();
  if (a.trans) {
    p.row_buf.resize(p.m * p.k);
    for (std::size_t i = 0; i < p.m; ++i)
      for (std::size_t q = 0; q < p.k; ++q) p.row_buf[i * p.k + q] = a(i, q);
    p.rows = p.row_buf.data();
  } else {
    p.rows = a.data;
  }
  if (b.trans || p.n == 1) {
    p.cols = b.data;  // stored n × k (a single column is contiguous either way)
  } else {
    p.col_buf.resize(p.n * p.k);
    for (std::size_t q = 0; q < p.k; ++q)
      for (std::size_t j = 0; j < p.n; ++j) p.col_buf[j * p.k + q] = b.data[q * p.n + j];
    p.cols = p.col_buf.data();
  }
  return p;
}

template <class T>
inline void gemm_row(const PackedOperands<T>& p, T* c, std::size_t i, bool accumulate) {
  const T* row = p.rows + i * p.k;
  for (std::size_t j = 0; j < p.n; ++j) {
    const T v = dot_lanes(row, p.cols + j * p.k, p.k);
    c[i * p.n + j] = accumulate ? c[i * p.n + j] + v : v;
  }
}

// Feature map of one filter at window start j over a flattened sentence.
template <class T>
inline T conv_window(const T* s, std::size_t d, const T* w, std::size_t rd, T bias, std::size_t j) {
  return dot_lanes(w, s + j * d, rd) + bias;
}

// Gradient w.r.t. sentence row t: sum over windows covering t and all
// filters, accumulated per column in (window, filter) order.
template <class T>
inline void conv_input_grad_row(const T* g, const T* w, std::size_t filters, std::size_t len, std::size_t d,
                                std::size_t r, T* ds, std::size_t t, T* scratch) {
  const std::size_t rd = r * d;
  const std::size_t j_lo = t + 1 >= r ? t + 1 - r : 0;
  const std::size_t j_hi = t < len ? t : len - 1;
  for (std::size_t c = 0; c < d; ++c) scratch[c] = T{0};
  for (std::size_t j = j_lo; j <= j_hi; ++j) {
    const std::size_t offset = (t - j) * d;
    for (std::size_t f = 0; f < filters; ++f) {
      const T gf = g[f * len + j];
      const T* wrow = w + f * rd + offset;
      for (std::size_t c = 0; c < d; ++c) scratch[c] += gf * wrow[c];
    }
  }
  for (std::size_t c = 0; c < d; ++c) ds[t * d + c] += scratch[c];
}

template <class T>
inline void conv_weight_grad_row(const T* g, const T* s, std::size_t len, std::size_t d, std::size_t r, T* dw,
                                 T* db, std::size_t f, T* scratch) {
  const std::size_t rd = r * d;
  for (std::size_t q = 0; q < rd; ++q) scratch[q] = T{0};
  T bias_acc = T{0};
  for (std::size_t j = 0; j < len; ++j) {
    const T gf = g[f * len + j];
    const T* window = s + j * d;
    for (std::size_t q = 0; q < rd; ++q) scratch[q] += gf * window[q];
    bias_acc += gf;
  }
  for (std::size_t q = 0; q < rd; ++q) dw[f * rd + q] += scratch[q];
  db[f] += bias_acc;
}

}  // namespace detail

namespace serial {

// c[m×n] (+)= op(a)·op(b)
template <class T>
void gemm(const MatView<T>& a, const MatView<T>& b, T* c, bool accumulate) {
  const auto packed = detail::pack(a, b);
  for (std::size_t i = 0; i < packed.m; ++i) detail::gemm_row(packed, c, i, accumulate);
}

// out[f, j] = dot(w[f], flatten(s[j .. j+r-1])) + bias[f]
template <class T>
void conv_bank_forward(const T* s, std::size_t n, std::size_t d, const T* w, const T* bias, std::size_t filters,
                       std::size_t r, T* out) {
  const std::size_t len = n - r + 1;
  for (std::size_t f = 0; f < filters; ++f)
    for (std::size_t j = 0; j < len; ++j) out[f * len + j] = detail::conv_window(s, d, w + f * r * d, r * d, bias[f], j);
}

template <class T>
void conv_bank_backward(const T* g, const T* s, std::size_t n, std::size_t d, const T* w, std::size_t filters,
                        std::size_t r, T* ds, T* dw, T* db) {
  const std::size_t len = n - r + 1;
  std::vector<T> scratch(r * d);
  if (ds)
    for (std::size_t t = 0; t < n; ++t) detail::conv_input_grad_row(g, w, filters, len, d, r, ds, t, scratch.data());
  if (dw)
    for (std::size_t f = 0; f < filters; ++f) detail::conv_weight_grad_row(g, s, len, d, r, dw, db, f, scratch.data());
}

}  // namespace serial

namespace omp {

template <class T>
void gemm(const MatView<T>& a, const MatView<T>& b, T* c, bool accumulate) {
  const auto packed = detail::pack(a, b);
  const auto m = static_cast<long>(packed.m);
#pragma omp parallel for schedule(static) num_threads(parallel::worker_count())
  for (long i = 0; i < m; ++i) detail::gemm_row(packed, c, static_cast<std::size_t>(i), accumulate);
}

template <class T>
void conv_bank_forward(const T* s, std::size_t n, std::size_t d, const T* w, const T* bias, std::size_t filters,
                       std::size_t r, T* out) {
  const std::size_t len = n - r + 1;
#pragma omp parallel for schedule(static) num_threads(parallel::worker_count())
  for (long f = 0; f < static_cast<long>(filters); ++f)
    for (std::size_t j = 0; j < len; ++j)
      out[f * len + j] = detail::conv_window(s, d, w + f * r * d, r * d, bias[f], j);
}

template <class T>
void conv_bank_backward(const T* g, const T* s, std::size_t n, std::size_t d, const T* w, std::size_t filters,
                        std::size_t r, T* ds, T* dw, T* db) {
  const std::size_t len = n - r + 1;
  const int workers = parallel::worker_count();
  if (ds) {
#pragma omp parallel num_threads(workers)
    {
      std::vector<T> scratch(d);
#pragma omp for schedule(static)
      for (long t = 0; t < static_cast<long>(n); ++t)
        detail::conv_input_grad_row(g, w, filters, len, d, r, ds, static_cast<std::size_t>(t), scratch.data());
    }
  }
  if (dw) {
#pragma omp parallel num_threads(workers)
    {
      std::vector<T> scratch(r * d);
#pragma omp for schedule(static)
      for (long f = 0; f < static_cast<long>(filters); ++f)
        detail::conv_weight_grad_row(g, s, len, d, r, dw, db, static_cast<std::size_t>(f), scratch.data());
    }
  }
}

}  // namespace omp

// Below this many multiply-adds the thread fork costs more than it saves.
inline constexpr std::size_t kParallelWorkThreshold = 1u << 16;

inline bool use_parallel(std::size_t work) {
  return work >= kParallelWorkThreshold && !parallel::in_parallel() && parallel::worker_count() > 1;
}

template <class T>
void gemm(const MatView<T>& a, const MatView<T>& b, T* c, bool accumulate) {
  if (use_parallel(a.out_rows() * a.out_cols() * b.out_cols()))
    omp::gemm(a, b, c, accumulate);
  else
    serial::gemm(a, b, c, accumulate);
}

template <class T>
void conv_bank_forward(const T* s, std::size_t n, std::size_t d, const T* w, const T* bias, std::size_t filters,
                       std::size_t r, T* out) {
  if (use_parallel(filters * (n - r + 1) * r * d))
    omp::conv_bank_forward(s, n, d, w, bias, filters, r, out);
  else
    serial::conv_bank_forward(s, n, d, w, bias, filters, r, out);
}

template <class T>
void conv_bank_backward(const T* g, const T* s, std::size_t n, std::size_t d, const T* w, std::size_t filters,
                        std::size_t r, T* ds, T* dw, T* db) {
  if (use_parallel(2 * filters * (n - r + 1) * r * d))
    omp::conv_bank_backward(g, s, n, d, w, filters, r, ds, dw, db);
  else
    serial::conv_bank_backward(g, s, n, d, w, filters, r, ds, dw, db);
}

}  // namespace stylehan::kernels
