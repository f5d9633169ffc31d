// Copyright 2026 The One2Set Authors.
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
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace one2set {

// Dense row-major matrix. Rows are the unit of independence throughout the
// model: every kernel below computes an output row from input rows only, in
// a fixed loop order, so stacking more rows never changes a row's bits.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  T operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  bool same_shape(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <typename T>
void add_into(Matrix<T>& dst, const Matrix<T>& src) {
  assert(dst.same_shape(src));
  T* d = dst.data();
  const T* s = src.data();
  for (std::size_t i = 0, n = dst.size(); i < n; ++i) d[i] += s[i];
}

// out += a * b
template <typename T>
void gemm_acc(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  assert(b.rows() == k && out.rows() == n && out.cols() == m);
  for (std::size_t i = 0; i < n; ++i) {
    T* o = out.data() + i * m;
    const T* ar = a.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = ar[p];
      if (av == T(0)) continue;
      const T* br = b.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) o[j] += av * br[j];
    }
  }
}

// out += a * b^T
template <typename T>
void gemm_nt_acc(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  assert(b.cols() == k && out.rows() == n && out.cols() == m);
  for (std::size_t i = 0; i < n; ++i) {
    const T* ar = a.data() + i * k;
    T* o = out.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) {
      const T* br = b.data() + j * k;
      T s = 0;
      for (std::size_t p = 0; p < k; ++p) s += ar[p] * br[p];
      o[j] += s;
    }
  }
}

// out += a^T * b
template <typename T>
void gemm_tn_acc(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  assert(b.rows() == n && out.rows() == k && out.cols() == m);
  for (std::size_t i = 0; i < n; ++i) {
    const T* ar = a.data() + i * k;
    const T* br = b.data() + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = ar[p];
      if (av == T(0)) continue;
      T* o = out.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) o[j] += av * br[j];
    }
  }
}

// Sinusoidal positional embedding for 1-based position t.
template <typename T>
void positional_embedding(std::size_t t, std::span<T> out) {
  const std::size_t d = out.size();
  for (std::size_t i = 0; i < d; i += 2) {
    const double freq =
        std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(d));
    const double angle = static_cast<double>(t) * freq;
    out[i] = static_cast<T>(std::sin(angle));
    if (i + 1 < d) out[i + 1] = static_cast<T>(std::cos(angle));
  }
}

template <typename T, typename Rng>
void fill_uniform(Matrix<T>& m, T limit, Rng& rng) {
  std::uniform_real_distribution<double> dist(-static_cast<double>(limit),
                                              static_cast<double>(limit));
  for (auto& v : m.storage()) v = static_cast<T>(dist(rng));
}

}  // namespace one2set
