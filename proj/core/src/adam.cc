// Copyright (c) 2026 The unifyspeech-cpp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "unifyspeech/adam.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "unifyspeech/errors.h"

namespace unifyspeech {

void AdamStep(std::span<double> param, std::span<const double> grad,
              AdamSlot& slot, const AdamOptions& options,
              std::size_t sparse_row_width) {
  if (grad.size() != param.size()) {
    throw DimensionError("adam: gradient has " + std::to_string(grad.size()) +
                         " values for a parameter of " +
                         std::to_string(param.size()));
  }
  if (slot.m.size() != param.size()) {
    slot.m.assign(param.size(), 0.0);
    slot.v.assign(param.size(), 0.0);
  }
  ++slot.step;
  const double t = static_cast<double>(slot.step);
  const double c1 = 1.0 - std::pow(options.beta1, t);
  const double c2 = 1.0 - std::pow(options.beta2, t);
  const std::size_t width = sparse_row_width > 0 ? sparse_row_width : param.size();
  for (std::size_t begin = 0; begin < param.size(); begin += width) {
    const std::size_t end = std::min(begin + width, param.size());
    if (sparse_row_width > 0) {
      bool touched = false;
      for (std::size_t i = begin; i < end && !touched; ++i) touched = grad[i] != 0.0;
      if (!touched) continue;
    }
    for (std::size_t i = begin; i < end; ++i) {
      const double g = grad[i];
      slot.m[i] = options.beta1 * slot.m[i] + (1.0 - options.beta1) * g;
      slot.v[i] = options.beta2 * slot.v[i] + (1.0 - options.beta2) * g * g;
      const double m_hat = slot.m[i] / c1;
      const double v_hat = slot.v[i] / c2;
      param[i] -= options.lr * m_hat / (std::sqrt(v_hat) + options.eps);
    }
  }
}

Adam::Adam(std::vector<Param> params, AdamOptions options)
    : params_(std::move(params)), slots_(params_.size()), options_(options) {
  if (!(options_.lr >= 0.0)) throw ConfigError("adam: learning rate must be >= 0");
}

double Adam::ClipGradNorm(double max_norm) {
  double sq = 0.0;
  for (const Param& p : params_) {
    if (!p.tensor.has_grad()) continue;
    for (double g : p.tensor.grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (std::isfinite(norm) && norm > max_norm && max_norm > 0.0) {
    const double scale = max_norm / norm;
    for (Param& p : params_) {
      if (!p.tensor.has_grad()) continue;
      for (double& g : p.tensor.mutable_grad()) g *= scale;
    }
  }
  return norm;
}

void Adam::Step() {
  for (const Param& p : params_) {
    if (!p.tensor.has_grad()) continue;
    for (double g : p.tensor.grad()) {
      if (!std::isfinite(g)) {
        throw NumericError("adam: non-finite gradient in parameter '" + p.name + "'");
      }
    }
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Param& p = params_[i];
    if (!p.tensor.has_grad()) continue;
    AdamStep(p.tensor.mutable_data(), p.tensor.grad(), slots_[i], options_,
             p.row_sparse ? p.tensor.cols() : 0);
  }
}

void Adam::ClearGrads() {
  for (Param& p : params_) p.tensor.ClearGrad();
}

}  // namespace unifyspeech
