// Copyright 2026 The vhd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vhd/train/optimizer.h"

#include <cmath>
#include <string>

#include "vhd/error.h"
#include "vhd/model/params.h"

namespace vhd::train {

void sgd_step(std::span<Tensor> params,
              std::span<const std::vector<double>> grads,
              OptimizerState& state, double lr) {
  if (params.size() != grads.size()) {
    throw DimensionError("sgd_step: " + std::to_string(params.size()) +
                         " parameters but " + std::to_string(grads.size()) +
                         " gradients");
  }
  if (state.velocity.empty()) {
    for (const Tensor& p : params) state.velocity.emplace_back(p.size(), 0.0);
  }
  if (state.velocity.size() != params.size()) {
    throw DimensionError("sgd_step: optimizer state tracks " +
                         std::to_string(state.velocity.size()) + " tensors");
  }
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (grads[t].size() != params[t].size() ||
        state.velocity[t].size() != params[t].size()) {
      throw DimensionError("sgd_step: gradient or velocity shape differs from " +
                           diff::shape_string(params[t].shape()));
    }
    for (double g : grads[t]) {
      if (!std::isfinite(g)) {
        throw NumericalError("non-finite gradient; step aborted");
      }
    }
  }
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto theta = params[t].mutable_values();
    auto& v = state.velocity[t];
    const auto& g = grads[t];
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double gd = g[i] + state.weight_decay * theta[i];
      v[i] = state.momentum * v[i] + gd;
      theta[i] -= lr * v[i];
    }
  }
}

Sgd::Sgd(std::vector<Tensor> params, const Options& options)
    : params_(std::move(params)), options_(options) {
  state_.momentum = options.momentum;
  state_.weight_decay = options.weight_decay;
}

void Sgd::step(double lr) {
  std::vector<std::vector<double>> grads;
  grads.reserve(params_.size());
  double norm_sq = 0.0;
  for (const Tensor& p : params_) {
    grads.push_back(p.grad());
    for (double g : grads.back()) norm_sq += g * g;
  }
  if (options_.clip_norm > 0.0 && std::isfinite(norm_sq)) {
    const double norm = std::sqrt(norm_sq);
    if (norm > options_.clip_norm) {
      const double f = options_.clip_norm / norm;
      for (auto& g : grads) {
        for (double& x : g) x *= f;
      }
    }
  }
  sgd_step(params_, grads, state_, lr);
  if (options_.fp32_params) {
    for (Tensor& p : params_) model::round_to_float(p);
  }
}

void Sgd::zero_grad() {
  for (Tensor& p : params_) p.zero_grad();
}

}  // namespace vhd::train
