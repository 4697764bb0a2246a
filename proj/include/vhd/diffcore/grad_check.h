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

#ifndef VHD_DIFFCORE_GRAD_CHECK_H_
#define VHD_DIFFCORE_GRAD_CHECK_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "vhd/diffcore/tensor.h"

namespace vhd::diff {

struct GradCheckResult {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  // Flat index into the parameter list's concatenated coordinates.
  std::size_t worst_coordinate = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates_checked = 0;
};

struct GradCheckOptions {
  double step = 1e-6;
  // When set, only this many coordinates per tensor are checked, chosen
  // deterministically from `seed`. Large heads make exhaustive checks slow.
  std::optional<std::size_t> max_coordinates_per_tensor;
  std::uint64_t seed = 0;
  // Coordinates whose analytic and numeric values differ by at most this much
  // count as exact matches. Zero keeps the pure relative criterion.
  double absolute_tolerance = 0.0;
};

// Compares reverse-mode gradients of a scalar function against central
// differences (f(t + h) - f(t - h)) / 2h, coordinate by coordinate, and
// reports the worst relative error with denominator
// max(|analytic|, |numeric|, 1e-8).
//
// `f` must build its result from `params` each time it is called. The
// parameters are perturbed in place and restored afterwards.
GradCheckResult grad_check(const std::function<Tensor()>& f,
                           std::span<Tensor> params,
                           const GradCheckOptions& options = {});

// Single-tensor convenience form.
double grad_check(const std::function<Tensor()>& f, Tensor& param, double h);

}  // namespace vhd::diff

#endif  // VHD_DIFFCORE_GRAD_CHECK_H_
