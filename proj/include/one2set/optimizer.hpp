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
#include <vector>

#include "one2set/autograd.hpp"

namespace one2set {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.998;
  double epsilon = 1e-9;
  double clip_norm = 0.0;  // global gradient-norm clip; 0 disables
};

template <typename T>
double global_norm(const Gradients<T>& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (T v : g[i].storage()) s += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(s);
}

template <typename T>
class Adam {
 public:
  Adam(const ParameterSet<T>& params, AdamConfig cfg) : cfg_(cfg), m_(params), v_(params) {}

  void step(ParameterSet<T>& params, const Gradients<T>& grads) {
    ++t_;
    double clip = 1.0;
    if (cfg_.clip_norm > 0.0) {
      const double n = global_norm(grads);
      if (n > cfg_.clip_norm) clip = cfg_.clip_norm / n;
    }
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    const double lr = cfg_.learning_rate * std::sqrt(bc2) / bc1;
    for (std::size_t i = 0; i < params.size(); ++i) {
      T* w = params[i].value.data();
      const T* g = grads[i].data();
      T* m = m_[i].data();
      T* v = v_[i].data();
      for (std::size_t k = 0, n = params[i].value.size(); k < n; ++k) {
        const double gk = static_cast<double>(g[k]) * clip;
        m[k] = static_cast<T>(cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * gk);
        v[k] = static_cast<T>(cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * gk * gk);
        w[k] -= static_cast<T>(lr * m[k] / (std::sqrt(static_cast<double>(v[k])) + cfg_.epsilon));
      }
    }
  }

  std::size_t steps() const { return t_; }

 private:
  AdamConfig cfg_;
  Gradients<T> m_;
  Gradients<T> v_;
  std::size_t t_ = 0;
};

}  // namespace one2set
