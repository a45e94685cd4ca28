// Copyright 2026 The crrlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace crrlab {

/// Dense row-major matrix of doubles. A bias vector is a 1 x n matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  std::size_t size() const { return data.size(); }
  void zero() { std::fill(data.begin(), data.end(), 0.0); }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
  bool operator==(const Matrix&) const = default;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// out[j] = sum_i x[i] * w(i, j)   (x^T W)
inline void vec_mat(std::span<const double> x, const Matrix& w, std::span<double> out) {
  assert(x.size() == w.rows && out.size() == w.cols);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < w.rows; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* wr = w.data.data() + i * w.cols;
    for (std::size_t j = 0; j < w.cols; ++j) out[j] += xi * wr[j];
  }
}

/// out[i] = sum_j w(i, j) * y[j]   (W y)
inline void mat_vec(const Matrix& w, std::span<const double> y, std::span<double> out) {
  assert(y.size() == w.cols && out.size() == w.rows);
  for (std::size_t i = 0; i < w.rows; ++i) {
    const double* wr = w.data.data() + i * w.cols;
    double s = 0.0;
    for (std::size_t j = 0; j < w.cols; ++j) s += wr[j] * y[j];
    out[i] = s;
  }
}

/// g(i, j) += x[i] * y[j]
inline void add_outer(std::span<const double> x, std::span<const double> y, Matrix& g) {
  assert(x.size() == g.rows && y.size() == g.cols);
  for (std::size_t i = 0; i < g.rows; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    double* gr = g.data.data() + i * g.cols;
    for (std::size_t j = 0; j < g.cols; ++j) gr[j] += xi * y[j];
  }
}

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace crrlab
