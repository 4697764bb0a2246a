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

#ifndef VHD_DIFFCORE_TENSOR_H_
#define VHD_DIFFCORE_TENSOR_H_

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace vhd::diff {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Storage behind a Tensor handle. Gradients are allocated lazily; an empty
// grad vector means "all zeros".
struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;
};

// Dense row-major tensor of doubles.
//
// A Tensor is a cheap handle: copies share storage, which is what lets a
// parameter tensor participate in the tape and receive gradients. Use
// clone() for an independent copy. Tensors produced by operations are never
// mutated afterwards; only leaves (parameters) are updated in place, by the
// optimizer or initializer through mutable_values().
class Tensor {
 public:
  // A scalar zero. Mostly useful as a placeholder.
  Tensor();

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor from_vector(Shape shape, std::vector<double> values);
  static Tensor vector(std::vector<double> values);
  static Tensor scalar(double value);

  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return impl_->data.size(); }

  std::span<const double> values() const { return impl_->data; }
  std::span<double> mutable_values() { return impl_->data; }
  double at(std::size_t i) const;
  double at(std::size_t row, std::size_t col) const;
  // Value of a one-element tensor.
  double item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  Tensor& set_requires_grad(bool flag);

  bool has_grad() const { return !impl_->grad.empty(); }
  // Gradient values; zeros if nothing has been accumulated yet.
  std::vector<double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  // Independent copy of the values (no gradient, not recorded).
  Tensor clone() const;
  // Copy that shares nothing with the tape.
  Tensor detach() const { return clone(); }

  const std::shared_ptr<TensorImpl>& impl() const { return impl_; }
  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<TensorImpl> impl_;
};

}  // namespace vhd::diff

#endif  // VHD_DIFFCORE_TENSOR_H_
