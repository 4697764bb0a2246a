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

#include "vhd/diffcore/grad_check.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vhd/diffcore/tape.h"
#include "vhd/error.h"
#include "vhd/rng.h"

namespace vhd::diff {

namespace {

double evaluate(const std::function<Tensor()>& f) {
  const double value = f().item();
  if (!std::isfinite(value)) {
    throw DomainError("grad_check: function value is not finite");
  }
  return value;
}

std::vector<std::size_t> pick_coordinates(std::size_t size,
                                          const GradCheckOptions& options,
                                          Rng& rng) {
  std::vector<std::size_t> coords(size);
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (options.max_coordinates_per_tensor &&
      *options.max_coordinates_per_tensor < size) {
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(*options.max_coordinates_per_tensor);
    std::sort(coords.begin(), coords.end());
  }
  return coords;
}

}  // namespace

GradCheckResult grad_check(const std::function<Tensor()>& f,
                           std::span<Tensor> params,
                           const GradCheckOptions& options) {
  const double h = options.step;
  if (!(h > 0.0)) throw DomainError("grad_check: step must be positive");

  std::vector<bool> previous_flags;
  for (Tensor& p : params) {
    previous_flags.push_back(p.requires_grad());
    p.set_requires_grad(true);
    p.zero_grad();
  }

  std::vector<std::vector<double>> analytic;
  {
    Tape tape;
    TapeScope scope(tape);
    const Tensor loss = f();
    if (!std::isfinite(loss.item())) {
      throw DomainError("grad_check: function value is not finite");
    }
    tape.backward(loss);
    for (Tensor& p : params) analytic.push_back(p.grad());
  }

  GradCheckResult result;
  Rng rng(options.seed);
  NoGradScope no_grad;
  std::size_t flat_offset = 0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    Tensor& p = params[t];
    auto values = p.mutable_values();
    for (std::size_t i : pick_coordinates(p.size(), options, rng)) {
      const double original = values[i];
      values[i] = original + h;
      const double plus = evaluate(f);
      values[i] = original - h;
      const double minus = evaluate(f);
      values[i] = original;
      const double numeric = (plus - minus) / (2.0 * h);
      const double a = analytic[t][i];
      const double denom =
          std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double gap = std::abs(a - numeric);
      const double err = gap <= options.absolute_tolerance ? 0.0 : gap / denom;
      result.max_absolute_error = std::max(result.max_absolute_error, gap);
      ++result.coordinates_checked;
      if (err > result.max_relative_error ||
          result.coordinates_checked == 1) {
        result.max_relative_error = err;
        result.worst_coordinate = flat_offset + i;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
    flat_offset += p.size();
  }

  for (std::size_t t = 0; t < params.size(); ++t) {
    params[t].zero_grad();
    params[t].set_requires_grad(previous_flags[t]);
  }
  return result;
}

double grad_check(const std::function<Tensor()>& f, Tensor& param, double h) {
  GradCheckOptions options;
  options.step = h;
  return grad_check(f, std::span<Tensor>(&param, 1), options).max_relative_error;
}

}  // namespace vhd::diff
