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
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "one2set/tensor.hpp"

namespace one2set {

struct Assignment {
  std::vector<std::size_t> col_of_row;  // bijection rows -> columns
  std::vector<std::size_t> row_of_col;
  double cost = 0.0;                    // sum of selected entries, row order
};

namespace hungarian_detail {

// Kuhn augmenting-path search restricted to `allowed` edges.
inline bool augment(std::size_t row, const std::vector<std::vector<bool>>& allowed,
                    std::vector<bool>& seen, std::vector<long>& match_col) {
  for (std::size_t c = 0; c < allowed[row].size(); ++c) {
    if (!allowed[row][c] || seen[c]) continue;
    seen[c] = true;
    if (match_col[c] < 0 ||
        augment(static_cast<std::size_t>(match_col[c]), allowed, seen, match_col)) {
      match_col[c] = static_cast<long>(row);
      return true;
    }
  }
  return false;
}

inline bool has_perfect_matching(const std::vector<std::vector<bool>>& allowed,
                                 const std::vector<std::size_t>& rows) {
  const std::size_t n = allowed.empty() ? 0 : allowed.front().size();
  std::vector<long> match_col(n, -1);
  for (std::size_t r : rows) {
    std::vector<bool> seen(n, false);
    if (!augment(r, allowed, seen, match_col)) return false;
  }
  return true;
}

}  // namespace hungarian_detail

// Minimum-cost perfect assignment of a square matrix. The O(n^3)
// shortest-augmenting-path solver produces optimal dual potentials; among
// the optima (perfect matchings on zero reduced-cost edges) the
// lexicographically smallest row->column assignment is returned.
template <typename T>
Assignment hungarian(const Matrix<T>& cost) {
  const std::size_t n = cost.rows();
  if (cost.cols() != n) throw std::invalid_argument("hungarian: cost matrix must be square");
  double scale = 0.0;
  for (T v : cost.storage()) {
    if (!std::isfinite(static_cast<double>(v))) {
      throw std::invalid_argument("hungarian: non-finite cost entry");
    }
    scale = std::max(scale, std::abs(static_cast<double>(v)));
  }
  Assignment out;
  if (n == 0) return out;

  const double inf = std::numeric_limits<double>::infinity();
  auto a = [&](std::size_t i, std::size_t j) { return static_cast<double>(cost(i - 1, j - 1)); };
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> base(n);
  for (std::size_t j = 1; j <= n; ++j) base[p[j] - 1] = j - 1;
  auto total = [&](const std::vector<std::size_t>& col_of_row) {
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r) s += static_cast<double>(cost(r, col_of_row[r]));
    return s;
  };

  const double tol = 1e-9 * (1.0 + scale);
  std::vector<std::vector<bool>> tight(n, std::vector<bool>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      tight[i][j] = a(i + 1, j + 1) - u[i + 1] - v[j + 1] <= tol;

  std::vector<std::size_t> lex(n);
  std::vector<bool> col_taken(n, false);
  bool ok = true;
  for (std::size_t r = 0; r < n && ok; ++r) {
    bool placed = false;
    for (std::size_t c = 0; c < n && !placed; ++c) {
      if (col_taken[c] || !tight[r][c]) continue;
      auto trial = tight;
      for (std::size_t j = 0; j < n; ++j) trial[r][j] = (j == c);
      for (std::size_t j = 0; j < n; ++j)
        if (col_taken[j])
          for (std::size_t i = r + 1; i < n; ++i) trial[i][j] = false;
      for (std::size_t i = r + 1; i < n; ++i) trial[i][c] = false;
      std::vector<std::size_t> rest;
      for (std::size_t i = r + 1; i < n; ++i) rest.push_back(i);
      if (hungarian_detail::has_perfect_matching(trial, rest)) {
        lex[r] = c;
        col_taken[c] = true;
        placed = true;
      }
    }
    ok = placed;
  }

  const double base_cost = total(base);
  out.col_of_row = base;
  out.cost = base_cost;
  if (ok) {
    const double lex_cost = total(lex);
    if (lex_cost <= base_cost + tol * static_cast<double>(n)) {
      out.col_of_row = lex;
      out.cost = lex_cost;
    }
  }
  out.row_of_col.assign(n, 0);
  for (std::size_t r = 0; r < n; ++r) out.row_of_col[out.col_of_row[r]] = r;
  return out;
}

}  // namespace one2set
