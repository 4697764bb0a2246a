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

#include "vhd/diffcore/tensor.h"

#include <algorithm>
#include <sstream>

#include "vhd/error.h"

namespace vhd::diff {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

namespace {

void validate_shape(const Shape& shape) {
  for (std::size_t d : shape) {
    if (d == 0) {
      throw DimensionError("tensor dimensions must be positive, got " +
                           shape_string(shape));
    }
  }
}

}  // namespace

Tensor::Tensor() : impl_(std::make_shared<TensorImpl>()) {
  impl_->data.assign(1, 0.0);
}

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double value) {
  validate_shape(shape);
  auto impl = std::make_shared<TensorImpl>();
  impl->data.assign(shape_size(shape), value);
  impl->shape = std::move(shape);
  return Tensor(std::move(impl));
}

Tensor Tensor::from_vector(Shape shape, std::vector<double> values) {
  validate_shape(shape);
  if (shape_size(shape) != values.size()) {
    throw DimensionError("shape " + shape_string(shape) + " needs " +
                         std::to_string(shape_size(shape)) + " values, got " +
                         std::to_string(values.size()));
  }
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(values);
  return Tensor(std::move(impl));
}

Tensor Tensor::vector(std::vector<double> values) {
  if (values.empty()) throw DomainError("empty vector");
  const std::size_t n = values.size();
  return from_vector({n}, std::move(values));
}

Tensor Tensor::scalar(double value) { return from_vector({}, {value}); }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) {
    throw DimensionError("axis " + std::to_string(axis) +
                         " out of range for shape " + shape_string(shape()));
  }
  return impl_->shape[axis];
}

double Tensor::at(std::size_t i) const { return impl_->data.at(i); }

double Tensor::at(std::size_t row, std::size_t col) const {
  if (rank() != 2) {
    throw DimensionError("two-index access on shape " + shape_string(shape()));
  }
  return impl_->data.at(row * impl_->shape[1] + col);
}

double Tensor::item() const {
  if (size() != 1) {
    throw DimensionError("item() on shape " + shape_string(shape()));
  }
  return impl_->data[0];
}

Tensor& Tensor::set_requires_grad(bool flag) {
  impl_->requires_grad = flag;
  return *this;
}

std::vector<double> Tensor::grad() const {
  if (impl_->grad.empty()) return std::vector<double>(size(), 0.0);
  return impl_->grad;
}

std::span<double> Tensor::mutable_grad() {
  if (impl_->grad.empty()) impl_->grad.assign(size(), 0.0);
  return impl_->grad;
}

void Tensor::zero_grad() { impl_->grad.clear(); }

Tensor Tensor::clone() const {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = impl_->shape;
  impl->data = impl_->data;
  return Tensor(std::move(impl));
}

}  // namespace vhd::diff
