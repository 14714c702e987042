// Copyright 2026 The ctn Authors. All Rights Reserved.
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

#include "ctn/optimizer.h"

#include <cmath>

#include "ctn/errors.h"

namespace ctn {

double GradientNorm(const std::vector<NamedTensor>& params) {
  double sq = 0.0;
  for (const auto& p : params) {
    if (!p.tensor.has_grad()) continue;
    for (double g : p.tensor.grad()) sq += g * g;
  }
  return std::sqrt(sq);
}

double ClipGradients(const std::vector<NamedTensor>& params, double max_l2) {
  if (!(max_l2 > 0.0)) throw ConfigError("clip norm must be positive");
  for (const auto& p : params) {
    if (!p.tensor.has_grad()) continue;
    for (double g : p.tensor.grad()) {
      if (!std::isfinite(g)) {
        throw NumericError("non-finite gradient in parameter '" + p.name + "'");
      }
    }
  }
  const double norm = GradientNorm(params);
  if (norm <= max_l2) return 1.0;
  const double scale = max_l2 / norm;
  for (const auto& p : params) {
    if (!p.tensor.has_grad()) continue;
    for (double& g : p.tensor.mutable_grad()) g *= scale;
  }
  return scale;
}

Adam::Adam(std::vector<NamedTensor> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  for (const auto& p : params_) {
    m_.emplace_back(p.tensor.size(), 0.0);
    v_.emplace_back(p.tensor.size(), 0.0);
  }
}

void Adam::Step(double lr) {
  ++steps_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (size_t k = 0; k < params_.size(); ++k) {
    Tensor& t = params_[k].tensor;
    auto w = t.mutable_data();
    std::span<const double> g;
    if (t.has_grad()) g = t.grad();
    auto& m = m_[k];
    auto& v = v_[k];
    for (size_t i = 0; i < w.size(); ++i) {
      const double gi = g.empty() ? 0.0 : g[i];
      m[i] = b1 * m[i] + (1.0 - b1) * gi;
      v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      w[i] -= lr * m_hat / (std::sqrt(v_hat) + options_.eps);
    }
  }
}

LrSchedule::LrSchedule(double initial, int patience)
    : lr_(initial), patience_(patience) {
  if (!(initial > 0.0)) throw ConfigError("initial learning rate must be positive");
  if (patience < 1) throw ConfigError("lr halving patience must be >= 1");
}

bool LrSchedule::Observe(double metric) {
  if (!has_best_ || metric > best_) {
    has_best_ = true;
    best_ = metric;
    stale_epochs_ = 0;
    return true;
  }
  if (++stale_epochs_ >= patience_) {
    lr_ *= 0.5;
    stale_epochs_ = 0;
  }
  return false;
}

}  // namespace ctn
