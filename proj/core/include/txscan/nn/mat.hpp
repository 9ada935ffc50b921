// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "txscan/errors.hpp"

namespace txscan::nn {

/// Dense row-major matrix. Vectors are 1 x n. This is deliberately minimal:
/// the encoder needs nothing fancier, and keeping one type makes parameter
/// traversal (Adam, checkpoints, gradient checks) uniform.
template <typename T>
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<T> v;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c) {}

  T& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  const T& at(int r, int c) const {
    return v[static_cast<std::size_t>(r) * cols + c];
  }
  T* row(int r) { return v.data() + static_cast<std::size_t>(r) * cols; }
  const T* row(int r) const {
    return v.data() + static_cast<std::size_t>(r) * cols;
  }
  std::size_t size() const { return v.size(); }
  void zero() { std::fill(v.begin(), v.end(), T(0)); }

  bool same_shape(const Mat& o) const {
    return rows == o.rows && cols == o.cols;
  }
};

/// out[s, o] = sum_i a[s, i] * w[o, i]   (a: [n x in], w: [out x in])
template <typename T>
void matmul_bt(const Mat<T>& a, const Mat<T>& w, Mat<T>& out) {
  if (a.cols != w.cols || out.rows != a.rows || out.cols != w.rows)
    throw ShapeError("matmul_bt shape mismatch");
  out.zero();
  for (int s = 0; s < a.rows; ++s) {
    const T* arow = a.row(s);
    T* orow = out.row(s);
    for (int o = 0; o < w.rows; ++o) {
      const T* wrow = w.row(o);
      T acc = T(0);
      for (int i = 0; i < a.cols; ++i) acc += arow[i] * wrow[i];
      orow[o] = acc;
    }
  }
}

/// out[s, j] = sum_i a[s, i] * b[i, j]   (a: [n x k], b: [k x m])
template <typename T>
void matmul(const Mat<T>& a, const Mat<T>& b, Mat<T>& out) {
  if (a.cols != b.rows || out.rows != a.rows || out.cols != b.cols)
    throw ShapeError("matmul shape mismatch");
  out.zero();
  for (int s = 0; s < a.rows; ++s) {
    const T* arow = a.row(s);
    T* orow = out.row(s);
    for (int i = 0; i < a.cols; ++i) {
      const T scale = arow[i];
      const T* brow = b.row(i);
      for (int j = 0; j < b.cols; ++j) orow[j] += scale * brow[j];
    }
  }
}

/// out[i, j] = sum_s a[s, i] * b[s, j]   (a: [n x k], b: [n x m])
template <typename T>
void matmul_at(const Mat<T>& a, const Mat<T>& b, Mat<T>& out) {
  if (a.rows != b.rows || out.rows != a.cols || out.cols != b.cols)
    throw ShapeError("matmul_at shape mismatch");
  out.zero();
  for (int s = 0; s < a.rows; ++s) {
    const T* arow = a.row(s);
    const T* brow = b.row(s);
    for (int i = 0; i < a.cols; ++i) {
      const T scale = arow[i];
      T* orow = out.row(i);
      for (int j = 0; j < b.cols; ++j) orow[j] += scale * brow[j];
    }
  }
}

template <typename T>
void axpy(Mat<T>& y, const Mat<T>& x, T alpha = T(1)) {
  if (!y.same_shape(x)) throw ShapeError("axpy shape mismatch");
  for (std::size_t i = 0; i < y.size(); ++i) y.v[i] += alpha * x.v[i];
}

}  // namespace txscan::nn
