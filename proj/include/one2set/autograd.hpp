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

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "one2set/tensor.hpp"

namespace one2set {

template <typename T>
struct Parameter {
  std::string name;
  Matrix<T> value;
};

// Owns every learned tensor of a model, addressed by stable index.
template <typename T>
class ParameterSet {
 public:
  std::size_t add(std::string name, std::size_t rows, std::size_t cols) {
    if (by_name_.count(name)) {
      throw std::logic_error("duplicate parameter name: " + name);
    }
    by_name_.emplace(name, params_.size());
    params_.push_back({std::move(name), Matrix<T>(rows, cols)});
    return params_.size() - 1;
  }

  std::size_t size() const { return params_.size(); }
  Parameter<T>& operator[](std::size_t i) { return params_[i]; }
  const Parameter<T>& operator[](std::size_t i) const { return params_[i]; }

  const Parameter<T>* find(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : &params_[it->second];
  }
  Parameter<T>* find(const std::string& name) {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : &params_[it->second];
  }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
  }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::vector<Parameter<T>> params_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

// Gradient accumulators aligned index-for-index with a ParameterSet.
template <typename T>
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParameterSet<T>& params) {
    grads_.reserve(params.size());
    for (const auto& p : params) {
      grads_.emplace_back(p.value.rows(), p.value.cols());
    }
  }
  std::size_t size() const { return grads_.size(); }
  Matrix<T>& operator[](std::size_t i) { return grads_[i]; }
  const Matrix<T>& operator[](std::size_t i) const { return grads_[i]; }
  void zero() {
    for (auto& g : grads_) g.fill(T(0));
  }
  void accumulate(const Gradients& o) {
    for (std::size_t i = 0; i < grads_.size(); ++i) add_into(grads_[i], o[i]);
  }
  void scale(T s) {
    for (auto& g : grads_)
      for (auto& v : g.storage()) v *= s;
  }

 private:
  std::vector<Matrix<T>> grads_;
};

struct Var {
  std::int32_t id = -1;
  bool valid() const { return id >= 0; }
};

// Row-wise key window [begin, end) used by masked attention.
using RowRange = std::pair<std::size_t, std::size_t>;

// Reverse-mode tape. A tape built without a gradient sink records nothing
// and behaves as a plain forward evaluator.
template <typename T>
class Tape {
 public:
  using Backward = std::function<void(Tape&)>;

  explicit Tape(const ParameterSet<T>& params, Gradients<T>* sink = nullptr)
      : params_(&params), sink_(sink), param_vars_(params.size()) {}

  bool recording() const { return sink_ != nullptr; }

  void set_training(bool training, std::uint64_t seed = 0) {
    training_ = training;
    rng_.seed(seed);
  }
  bool training() const { return training_; }
  std::mt19937_64& rng() { return rng_; }

  Var param(std::size_t index) {
    Var& cached = param_vars_[index];
    if (cached.valid()) return cached;
    Node n;
    n.ref = &(*params_)[index].value;
    n.param_index = static_cast<std::int64_t>(index);
    n.needs_grad = recording();
    nodes_.push_back(std::move(n));
    cached = Var{static_cast<std::int32_t>(nodes_.size() - 1)};
    return cached;
  }

  Var constant(Matrix<T> m) {
    Node n;
    n.value = std::move(m);
    nodes_.push_back(std::move(n));
    return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
  }

  const Matrix<T>& value(Var v) const {
    const Node& n = nodes_[v.id];
    return n.ref ? *n.ref : n.value;
  }

  bool needs_grad(Var v) const { return nodes_[v.id].needs_grad; }

  // Gradient buffer of v; allocated on first touch.
  Matrix<T>& grad(Var v) {
    Node& n = nodes_[v.id];
    if (n.grad.empty()) {
      const Matrix<T>& val = value(v);
      n.grad = Matrix<T>(val.rows(), val.cols());
    }
    return n.grad;
  }

  Var push(Matrix<T> value, std::initializer_list<Var> inputs, Backward fn) {
    bool ng = false;
    if (recording()) {
      for (Var in : inputs) ng = ng || nodes_[in.id].needs_grad;
    }
    Node n;
    n.value = std::move(value);
    n.needs_grad = ng;
    if (ng) n.backward = std::move(fn);
    nodes_.push_back(std::move(n));
    return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
  }

  Var push_many(Matrix<T> value, const std::vector<Var>& inputs, Backward fn) {
    bool ng = false;
    if (recording()) {
      for (Var in : inputs) ng = ng || nodes_[in.id].needs_grad;
    }
    Node n;
    n.value = std::move(value);
    n.needs_grad = ng;
    if (ng) n.backward = std::move(fn);
    nodes_.push_back(std::move(n));
    return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
  }

  // Seeds d(root)/d(root) = 1 for a 1x1 root and propagates into the sink.
  void backward(Var root) {
    if (!recording()) throw std::logic_error("backward on a forward-only tape");
    if (value(root).size() != 1) {
      throw std::logic_error("backward root must be a scalar");
    }
    grad(root)(0, 0) = T(1);
    for (std::int32_t i = root.id; i >= 0; --i) {
      Node& n = nodes_[i];
      if (!n.needs_grad || n.grad.empty()) continue;
      if (n.backward) {
        current_ = Var{i};
        n.backward(*this);
      } else if (n.param_index >= 0) {
        add_into((*sink_)[static_cast<std::size_t>(n.param_index)], n.grad);
      }
    }
  }

  // The node whose backward is running.
  Var current() const { return current_; }

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix<T> value;
    const Matrix<T>* ref = nullptr;
    Matrix<T> grad;
    Backward backward;
    std::int64_t param_index = -1;
    bool needs_grad = false;
  };

  const ParameterSet<T>* params_;
  Gradients<T>* sink_;
  std::vector<Node> nodes_;
  std::vector<Var> param_vars_;
  Var current_;
  bool training_ = false;
  std::mt19937_64 rng_;
};

namespace ops {

template <typename T>
Var matmul(Tape<T>& t, Var a, Var b) {
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  if (av.cols() != bv.rows()) throw std::invalid_argument("matmul shape");
  Matrix<T> out(av.rows(), bv.cols());
  gemm_acc(av, bv, out);
  return t.push(std::move(out), {a, b}, [a, b](Tape<T>& tp) {
    const auto& g = tp.grad(tp.current());
    if (tp.needs_grad(a)) gemm_nt_acc(g, tp.value(b), tp.grad(a));
    if (tp.needs_grad(b)) gemm_tn_acc(tp.value(a), g, tp.grad(b));
  });
}

// a * b^T
template <typename T>
Var matmul_nt(Tape<T>& t, Var a, Var b) {
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  if (av.cols() != bv.cols()) throw std::invalid_argument("matmul_nt shape");
  Matrix<T> out(av.rows(), bv.rows());
  gemm_nt_acc(av, bv, out);
  return t.push(std::move(out), {a, b}, [a, b](Tape<T>& tp) {
    const auto& g = tp.grad(tp.current());
    if (tp.needs_grad(a)) gemm_acc(g, tp.value(b), tp.grad(a));
    if (tp.needs_grad(b)) gemm_tn_acc(g, tp.value(a), tp.grad(b));
  });
}

template <typename T>
Var add(Tape<T>& t, Var a, Var b) {
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  if (!av.same_shape(bv)) throw std::invalid_argument("add shape");
  Matrix<T> out = av;
  add_into(out, bv);
  return t.push(std::move(out), {a, b}, [a, b](Tape<T>& tp) {
    const auto& g = tp.grad(tp.current());
    if (tp.needs_grad(a)) add_into(tp.grad(a), g);
    if (tp.needs_grad(b)) add_into(tp.grad(b), g);
  });
}

// a + broadcast(bias) where bias is 1 x cols.
template <typename T>
Var add_row(Tape<T>& t, Var a, Var bias) {
  const auto& av = t.value(a);
  const auto& bv = t.value(bias);
  if (bv.rows() != 1 || bv.cols() != av.cols()) {
    throw std::invalid_argument("add_row shape");
  }
  Matrix<T> out = av;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bv(0, c);
  }
  return t.push(std::move(out), {a, bias}, [a, bias](Tape<T>& tp) {
    const auto& g = tp.grad(tp.current());
    if (tp.needs_grad(a)) add_into(tp.grad(a), g);
    if (tp.needs_grad(bias)) {
      auto& gb = tp.grad(bias);
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) gb(0, c) += g(r, c);
    }
  });
}

template <typename T>
Var scale(Tape<T>& t, Var a, T s) {
  Matrix<T> out = t.value(a);
  for (auto& v : out.storage()) v *= s;
  return t.push(std::move(out), {a}, [a, s](Tape<T>& tp) {
    const auto& g = tp.grad(tp.current());
    auto& ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += s * g.data()[i];
  });
}

template <typename T>
Var relu(Tape<T>& t, Var a) {
  Matrix<T> out = t.value(a);
  for (auto& v : out.storage()) v = v > T(0) ? v : T(0);
  return t.push(std::move(out), {a}, [a](Tape<T>& tp) {
    const auto& g = tp.grad(tp.current());
    const auto& x = tp.value(a);
    auto& ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (x.data()[i] > T(0)) ga.data()[i] += g.data()[i];
  });
}

template <typename T>
Var sigmoid(Tape<T>& t, Var a) {
  Matrix<T> out = t.value(a);
  for (auto& v : out.storage()) v = T(1) / (T(1) + std::exp(-v));
  return t.push(std::move(out), {a}, [a](Tape<T>& tp) {
    const Var self = tp.current();
    const auto& g = tp.grad(self);
    const auto& y = tp.value(self);
    auto& ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const T s = y.data()[i];
      ga.data()[i] += g.data()[i] * s * (T(1) - s);
    }
  });
}

// Inverted dropout; identity unless the tape is in training mode.
template <typename T>
Var dropout(Tape<T>& t, Var a, double rate) {
  if (!t.training() || rate <= 0.0) return a;
  const auto& av = t.value(a);
  Matrix<T> mask(av.rows(), av.cols());
  std::bernoulli_distribution keep(1.0 - rate);
  const T s = static_cast<T>(1.0 / (1.0 - rate));
  for (auto& m : mask.storage()) m = keep(t.rng()) ? s : T(0);
  Matrix<T> out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= mask.data()[i];
  return t.push(std::move(out), {a}, [a, mask = std::move(mask)](Tape<T>& tp) {
    const auto& g = tp.grad(tp.current());
    auto& ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i)
      ga.data()[i] += g.data()[i] * mask.data()[i];
  });
}

template <typename T>
Var layer_norm(Tape<T>& t, Var x, Var gain, Var bias, T eps = T(1e-5)) {
  const auto& xv = t.value(x);
  const auto& gv = t.value(gain);
  const auto& bv = t.value(bias);
  const std::size_t n = xv.rows(), d = xv.cols();
  Matrix<T> out(n, d);
  Matrix<T> xhat(n, d);
  std::vector<T> inv_std(n);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = xv.row(r);
    T mean = 0;
    for (T v : row) mean += v;
    mean /= static_cast<T>(d);
    T var = 0;
    for (T v : row) var += (v - mean) * (v - mean);
    var /= static_cast<T>(d);
    const T is = T(1) / std::sqrt(var + eps);
    inv_std[r] = is;
    for (std::size_t c = 0; c < d; ++c) {
      xhat(r, c) = (row[c] - mean) * is;
      out(r, c) = xhat(r, c) * gv(0, c) + bv(0, c);
    }
  }
  return t.push(
      std::move(out), {x, gain, bias},
      [x, gain, bias, xhat = std::move(xhat),
       inv_std = std::move(inv_std)](Tape<T>& tp) {
        const auto& g = tp.grad(tp.current());
        const auto& gv = tp.value(gain);
        const std::size_t n = g.rows(), d = g.cols();
        if (tp.needs_grad(gain) || tp.needs_grad(bias)) {
          auto& gg = tp.grad(gain);
          auto& gb = tp.grad(bias);
          for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c) {
              gg(0, c) += g(r, c) * xhat(r, c);
              gb(0, c) += g(r, c);
            }
        }
        if (!tp.needs_grad(x)) return;
        auto& gx = tp.grad(x);
        std::vector<T> dxhat(d);
        for (std::size_t r = 0; r < n; ++r) {
          T sum_d = 0, sum_dx = 0;
          for (std::size_t c = 0; c < d; ++c) {
            dxhat[c] = g(r, c) * gv(0, c);
            sum_d += dxhat[c];
            sum_dx += dxhat[c] * xhat(r, c);
          }
          const T inv_d = T(1) / static_cast<T>(d);
          for (std::size_t c = 0; c < d; ++c) {
            gx(r, c) += inv_std[r] *
                        (dxhat[c] - inv_d * sum_d - xhat(r, c) * inv_d * sum_dx);
          }
        }
      });
}

// Rows of `table` selected by ids.
template <typename T>
Var gather_rows(Tape<T>& t, Var table, std::vector<int> ids) {
  const auto& tv = t.value(table);
  Matrix<T> out(ids.size(), tv.cols());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= tv.rows()) {
      throw std::out_of_range("gather_rows id");
    }
    auto src = tv.row(static_cast<std::size_t>(ids[r]));
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return t.push(std::move(out), {table},
                [table, ids = std::move(ids)](Tape<T>& tp) {
                  const auto& g = tp.grad(tp.current());
                  auto& gt = tp.grad(table);
                  for (std::size_t r = 0; r < ids.size(); ++r) {
                    auto dst = gt.row(static_cast<std::size_t>(ids[r]));
                    auto src = g.row(r);
                    for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
                  }
                });
}

template <typename T>
Var slice_cols(Tape<T>& t, Var a, std::size_t begin, std::size_t end) {
  const auto& av = t.value(a);
  Matrix<T> out(av.rows(), end - begin);
  for (std::size_t r = 0; r < av.rows(); ++r)
    for (std::size_t c = begin; c < end; ++c) out(r, c - begin) = av(r, c);
  return t.push(std::move(out), {a}, [a, begin](Tape<T>& tp) {
    const auto& g = tp.grad(tp.current());
    auto& ga = tp.grad(a);
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < g.cols(); ++c) ga(r, c + begin) += g(r, c);
  });
}

template <typename T>
Var concat_cols(Tape<T>& t, const std::vector<Var>& parts) {
  std::size_t cols = 0;
  const std::size_t rows = t.value(parts.front()).rows();
  for (Var p : parts) cols += t.value(p).cols();
  Matrix<T> out(rows, cols);
  std::size_t off = 0;
  for (Var p : parts) {
    const auto& pv = t.value(p);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < pv.cols(); ++c) out(r, off + c) = pv(r, c);
    off += pv.cols();
  }
  return t.push_many(std::move(out), parts, [parts](Tape<T>& tp) {
    const auto& g = tp.grad(tp.current());
    std::size_t off = 0;
    for (Var p : parts) {
      const std::size_t pc = tp.value(p).cols();
      if (tp.needs_grad(p)) {
        auto& gp = tp.grad(p);
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < pc; ++c) gp(r, c) += g(r, off + c);
      }
      off += pc;
    }
  });
}

// Softmax of each row restricted to its key window; entries outside the
// window are exactly zero.
template <typename T>
Var masked_softmax(Tape<T>& t, Var scores, std::vector<RowRange> windows) {
  const auto& sv = t.value(scores);
  if (windows.size() != sv.rows()) {
    throw std::invalid_argument("masked_softmax window count");
  }
  Matrix<T> out(sv.rows(), sv.cols());
  for (std::size_t r = 0; r < sv.rows(); ++r) {
    const auto [lo, hi] = windows[r];
    if (lo >= hi || hi > sv.cols()) {
      throw std::invalid_argument("masked_softmax empty window");
    }
    T mx = sv(r, lo);
    for (std::size_t c = lo + 1; c < hi; ++c) mx = std::max(mx, sv(r, c));
    T sum = 0;
    for (std::size_t c = lo; c < hi; ++c) {
      out(r, c) = std::exp(sv(r, c) - mx);
      sum += out(r, c);
    }
    for (std::size_t c = lo; c < hi; ++c) out(r, c) /= sum;
  }
  return t.push(std::move(out), {scores},
                [scores, windows = std::move(windows)](Tape<T>& tp) {
                  const Var self = tp.current();
                  const auto& g = tp.grad(self);
                  const auto& y = tp.value(self);
                  auto& gs = tp.grad(scores);
                  for (std::size_t r = 0; r < g.rows(); ++r) {
                    const auto [lo, hi] = windows[r];
                    T dot = 0;
                    for (std::size_t c = lo; c < hi; ++c) dot += g(r, c) * y(r, c);
                    for (std::size_t c = lo; c < hi; ++c)
                      gs(r, c) += y(r, c) * (g(r, c) - dot);
                  }
                });
}

template <typename T>
Var softmax_rows(Tape<T>& t, Var scores) {
  const std::size_t rows = t.value(scores).rows();
  const std::size_t cols = t.value(scores).cols();
  return masked_softmax(t, scores, std::vector<RowRange>(rows, {0, cols}));
}

// Zero-extends every row to `width` columns.
template <typename T>
Var pad_cols(Tape<T>& t, Var a, std::size_t width) {
  const auto& av = t.value(a);
  Matrix<T> out(av.rows(), width);
  for (std::size_t r = 0; r < av.rows(); ++r)
    for (std::size_t c = 0; c < av.cols(); ++c) out(r, c) = av(r, c);
  return t.push(std::move(out), {a}, [a](Tape<T>& tp) {
    const auto& g = tp.grad(tp.current());
    auto& ga = tp.grad(a);
    for (std::size_t r = 0; r < ga.rows(); ++r)
      for (std::size_t c = 0; c < ga.cols(); ++c) ga(r, c) += g(r, c);
  });
}

// out[r][cols[k]] += p[r][k]: scatters per-position mass onto vocabulary ids.
template <typename T>
Var scatter_cols(Tape<T>& t, Var p, std::vector<int> cols, std::size_t width) {
  const auto& pv = t.value(p);
  if (cols.size() != pv.cols()) throw std::invalid_argument("scatter_cols");
  Matrix<T> out(pv.rows(), width);
  for (std::size_t r = 0; r < pv.rows(); ++r)
    for (std::size_t k = 0; k < cols.size(); ++k)
      out(r, static_cast<std::size_t>(cols[k])) += pv(r, k);
  return t.push(std::move(out), {p}, [p, cols = std::move(cols)](Tape<T>& tp) {
    const auto& g = tp.grad(tp.current());
    auto& gp = tp.grad(p);
    for (std::size_t r = 0; r < gp.rows(); ++r)
      for (std::size_t k = 0; k < cols.size(); ++k)
        gp(r, k) += g(r, static_cast<std::size_t>(cols[k]));
  });
}

// g * a + (1 - g) * b with g a column vector (rows x 1).
template <typename T>
Var gate_mix(Tape<T>& t, Var g, Var a, Var b) {
  const auto& gv = t.value(g);
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  if (gv.cols() != 1 || gv.rows() != av.rows() || !av.same_shape(bv)) {
    throw std::invalid_argument("gate_mix shape");
  }
  Matrix<T> out(av.rows(), av.cols());
  for (std::size_t r = 0; r < av.rows(); ++r) {
    const T gr = gv(r, 0);
    for (std::size_t c = 0; c < av.cols(); ++c)
      out(r, c) = gr * av(r, c) + (T(1) - gr) * bv(r, c);
  }
  return t.push(std::move(out), {g, a, b}, [g, a, b](Tape<T>& tp) {
    const auto& go = tp.grad(tp.current());
    const auto& gv = tp.value(g);
    const auto& av = tp.value(a);
    const auto& bv = tp.value(b);
    const bool dg = tp.needs_grad(g), da = tp.needs_grad(a),
               db = tp.needs_grad(b);
    for (std::size_t r = 0; r < go.rows(); ++r) {
      const T gr = gv(r, 0);
      T acc = 0;
      for (std::size_t c = 0; c < go.cols(); ++c) {
        const T d = go(r, c);
        if (da) tp.grad(a)(r, c) += gr * d;
        if (db) tp.grad(b)(r, c) += (T(1) - gr) * d;
        acc += d * (av(r, c) - bv(r, c));
      }
      if (dg) tp.grad(g)(r, 0) += acc;
    }
  });
}

// -sum_i weights[i] * log(probs[rows[i]][targets[i]]) as a 1x1 value.
// Probabilities are floored at the smallest normal number before the log.
template <typename T>
Var weighted_nll(Tape<T>& t, Var probs, std::vector<std::size_t> rows,
                 std::vector<int> targets, std::vector<T> weights) {
  const auto& pv = t.value(probs);
  if (rows.size() != targets.size() || rows.size() != weights.size()) {
    throw std::invalid_argument("weighted_nll sizes");
  }
  constexpr T floor = std::numeric_limits<T>::min();
  T loss = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= pv.cols()) {
      throw std::out_of_range("weighted_nll target id");
    }
    if (weights[i] == T(0)) continue;
    const T p = pv(rows[i], static_cast<std::size_t>(targets[i]));
    loss -= weights[i] * std::log(std::max(p, floor));
  }
  Matrix<T> out(1, 1, loss);
  return t.push(std::move(out), {probs},
                [probs, rows = std::move(rows), targets = std::move(targets),
                 weights = std::move(weights)](Tape<T>& tp) {
                  const T g = tp.grad(tp.current())(0, 0);
                  const auto& pv = tp.value(probs);
                  auto& gp = tp.grad(probs);
                  for (std::size_t i = 0; i < rows.size(); ++i) {
                    if (weights[i] == T(0)) continue;
                    const auto c = static_cast<std::size_t>(targets[i]);
                    const T p = pv(rows[i], c);
                    if (p < floor) continue;
                    gp(rows[i], c) -= g * weights[i] / p;
                  }
                });
}

}  // namespace ops
}  // namespace one2set
