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

#ifndef VHD_TRAIN_OPTIMIZER_H_
#define VHD_TRAIN_OPTIMIZER_H_

#include <span>
#include <vector>

#include "vhd/diffcore/tensor.h"

namespace vhd::train {

using diff::Tensor;

struct OptimizerState {
  double momentum = 0.9;
  double weight_decay = 5e-4;
  // One velocity buffer per parameter tensor, zero-initialized on first use.
  std::vector<std::vector<double>> velocity;
};

// One step of SGD with classical momentum and L2 decay folded into the
// gradient:
//   g' = g + wd * theta;  v = m * v + g';  theta -= lr * v.
// Every gradient is checked before anything is modified, so a non-finite
// gradient raises NumericalError and leaves parameters and state untouched.
void sgd_step(std::span<Tensor> params,
              std::span<const std::vector<double>> grads,
              OptimizerState& state, double lr);

class Sgd {
 public:
  struct Options {
    double momentum = 0.9;
    double weight_decay = 5e-4;
    // Global L2 norm cap on the gradient; 0 disables clipping.
    double clip_norm = 0.0;
    // Round parameters to single precision after every step.
    bool fp32_params = true;
  };

  Sgd(std::vector<Tensor> params, const Options& options);

  // Reads the accumulated gradients of the parameters and updates them.
  void step(double lr);
  void zero_grad();

  const OptimizerState& state() const { return state_; }

 private:
  std::vector<Tensor> params_;
  Options options_;
  OptimizerState state_;
};

}  // namespace vhd::train

#endif  // VHD_TRAIN_OPTIMIZER_H_
