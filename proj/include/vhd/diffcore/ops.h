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

#ifndef VHD_DIFFCORE_OPS_H_
#define VHD_DIFFCORE_OPS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "vhd/diffcore/tensor.h"
#include "vhd/rng.h"

// Differentiable primitives. Every function here records a backward rule on
// the active tape when at least one input requires grad.
namespace vhd::diff {

// Floor applied to probabilities before taking logs in kl_div.
inline constexpr double kProbabilityFloor = 1e-12;
// Tolerance on sum(p) == 1 accepted by kl_div.
inline constexpr double kNormalizationTolerance = 1e-6;

// [m x k] * [k x n] -> [m x n].
Tensor matmul(const Tensor& a, const Tensor& b);

// Elementwise, identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

// [m x n] + [n], the bias row broadcast over rows.
Tensor add_bias(const Tensor& x, const Tensor& bias);

Tensor scale(const Tensor& x, double factor);
Tensor relu(const Tensor& x);

// Reductions to a scalar.
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// Softmax of a vector (rank 1), computed with max subtraction.
Tensor softmax(const Tensor& v);
// Row-wise softmax of a matrix.
Tensor softmax_rows(const Tensor& m);

// sum_j p_j (ln p_j - ln q_j) in nats. Both arguments must be probability
// vectors of the same length; probabilities are floored at
// kProbabilityFloor before the logs.
Tensor kl_div(const Tensor& p, const Tensor& q);

// Normalizes each row (last axis) to zero mean and unit variance, then
// applies gain and bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = 1e-5);

// Concatenation of rank-1 or rank-2 tensors along `axis`.
Tensor concat(std::span<const Tensor> parts, std::size_t axis);
// Sub-range [start, start + length) along `axis`.
Tensor slice(const Tensor& x, std::size_t axis, std::size_t start,
             std::size_t length);
Tensor transpose(const Tensor& x);
// Rows of a matrix picked by index; indices may repeat.
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> rows);
Tensor reshape(const Tensor& x, Shape shape);

// Inverted dropout. rate == 0 returns x unchanged.
Tensor dropout(const Tensor& x, double rate, Rng& rng);

}  // namespace vhd::diff

#endif  // VHD_DIFFCORE_OPS_H_
