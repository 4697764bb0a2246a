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

#include "vhd/diffcore/tape.h"

#include "vhd/error.h"

namespace vhd::diff {

namespace {
thread_local Tape* g_active_tape = nullptr;
}  // namespace

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kMatmul: return "matmul";
    case OpKind::kAdd: return "add";
    case OpKind::kAddBias: return "add_bias";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kScale: return "scale";
    case OpKind::kRelu: return "relu";
    case OpKind::kSum: return "sum";
    case OpKind::kMean: return "mean";
    case OpKind::kSoftmax: return "softmax";
    case OpKind::kSoftmaxRows: return "softmax_rows";
    case OpKind::kKlDiv: return "kl_div";
    case OpKind::kLayerNorm: return "layer_norm";
    case OpKind::kConcat: return "concat";
    case OpKind::kSlice: return "slice";
    case OpKind::kTranspose: return "transpose";
    case OpKind::kGatherRows: return "gather_rows";
    case OpKind::kReshape: return "reshape";
    case OpKind::kDropout: return "dropout";
  }
  return "unknown";
}

Tape::~Tape() {
  if (g_active_tape == this) g_active_tape = nullptr;
}

void Tape::record(TapeNode node) { nodes_.push_back(std::move(node)); }

void Tape::clear() { nodes_.clear(); }

Tape* Tape::active() { return g_active_tape; }

void Tape::backward(const Tensor& loss) {
  if (loss.size() != 1) {
    throw DimensionError("backward needs a scalar loss, got shape " +
                         shape_string(loss.shape()));
  }
  if (!loss.requires_grad()) {
    throw DomainError("backward on a tensor that does not require grad");
  }
  const auto& root = loss.impl();
  root->grad.assign(1, 1.0);
  bool seen_root = false;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (it->output == root) seen_root = true;
    if (!seen_root) continue;
    if (it->output->grad.empty()) continue;  // not on the loss's path
    it->backward(*it->output);
  }
  if (!seen_root) {
    throw DomainError("loss tensor was not recorded on this tape");
  }
}

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) {
  g_active_tape = &tape;
}

TapeScope::~TapeScope() { g_active_tape = previous_; }

NoGradScope::NoGradScope() : previous_(g_active_tape) {
  g_active_tape = nullptr;
}

NoGradScope::~NoGradScope() { g_active_tape = previous_; }

}  // namespace vhd::diff
