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

#ifndef VHD_DIFFCORE_TAPE_H_
#define VHD_DIFFCORE_TAPE_H_

#include <functional>
#include <memory>
#include <string_view>
#include <vector>

#include "vhd/diffcore/tensor.h"

namespace vhd::diff {

enum class OpKind {
  kMatmul,
  kAdd,
  kAddBias,
  kSub,
  kMul,
  kScale,
  kRelu,
  kSum,
  kMean,
  kSoftmax,
  kSoftmaxRows,
  kKlDiv,
  kLayerNorm,
  kConcat,
  kSlice,
  kTranspose,
  kGatherRows,
  kReshape,
  kDropout,
};

std::string_view op_name(OpKind kind);

// One recorded operation. The backward closure holds whatever activations
// it needs and adds its contribution to the input gradients, reading the
// output gradient from output->grad.
struct TapeNode {
  using Backward = std::function<void(const TensorImpl& output)>;

  OpKind kind;
  std::vector<std::shared_ptr<TensorImpl>> inputs;
  std::shared_ptr<TensorImpl> output;
  Backward backward;
};

// Records differentiable operations in execution order. Because an output
// always comes into existence after its inputs, execution order is already a
// topological order, and backward() simply walks the nodes in reverse.
//
// Operations record onto the tape made active by a TapeScope on the calling
// thread. With no active tape nothing is recorded (inference mode).
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  ~Tape();

  // Seeds d(loss)/d(loss) = 1 and propagates to every tensor that requires
  // grad. Gradients accumulate into leaves; call zero_grad on them between
  // steps.
  void backward(const Tensor& loss);

  void clear();
  std::size_t size() const { return nodes_.size(); }
  const std::vector<TapeNode>& nodes() const { return nodes_; }

  void record(TapeNode node);

  // The tape active on this thread, or nullptr.
  static Tape* active();

 private:
  friend class TapeScope;
  std::vector<TapeNode> nodes_;
};

// Makes a tape active on the current thread for the scope's lifetime.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;
  ~TapeScope();

 private:
  Tape* previous_;
};

// Suspends recording for the scope's lifetime.
class NoGradScope {
 public:
  NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;
  ~NoGradScope();

 private:
  Tape* previous_;
};

}  // namespace vhd::diff

#endif  // VHD_DIFFCORE_TAPE_H_
