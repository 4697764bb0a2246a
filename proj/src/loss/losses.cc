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

#include "vhd/loss/losses.h"

#include <cmath>
#include <string>

#include "vhd/diffcore/ops.h"
#include "vhd/error.h"

namespace vhd::loss {

namespace {

void check_pair(const Tensor& a, const Tensor& b, const char* what) {
  if (a.rank() != 1 || b.rank() != 1) {
    throw DimensionError(std::string(what) + ": expected vectors, got " +
                         diff::shape_string(a.shape()) + " and " +
                         diff::shape_string(b.shape()));
  }
  if (a.dim(0) != b.dim(0)) {
    throw DimensionError(std::string(what) + ": length mismatch " +
                         diff::shape_string(a.shape()) + " vs " +
                         diff::shape_string(b.shape()));
  }
  if (a.dim(0) < 2) {
    throw DomainError(std::string(what) +
                      ": a set needs at least two members");
  }
}

void check_finite(const Tensor& t, const char* what) {
  for (double v : t.values()) {
    if (!std::isfinite(v)) {
      throw DomainError(std::string(what) + ": non-finite value");
    }
  }
}

}  // namespace

Tensor set_pred_loss(const Tensor& labels, const Tensor& scores) {
  check_pair(labels, scores, "set_pred_loss");
  check_finite(labels, "set_pred_loss labels");
  return diff::kl_div(diff::softmax(labels.detach()), diff::softmax(scores));
}

Tensor coarse_loss(const Tensor& mixed_labels, const Tensor& coarse_scores) {
  for (double v : mixed_labels.values()) {
    if (v != 0.0 && v != 1.0) {
      throw DomainError("coarse_loss: mixed-set labels must be 0 or 1");
    }
  }
  return set_pred_loss(mixed_labels, coarse_scores);
}

Tensor fine_loss(const Tensor& source_labels, const Tensor& fine_scores) {
  return set_pred_loss(source_labels, fine_scores);
}

Tensor distill_loss(const Tensor& coarse_on_target,
                    const Tensor& fine_on_target, bool detach_teacher) {
  check_pair(coarse_on_target, fine_on_target, "distill_loss");
  Tensor teacher = diff::softmax(
      diff::scale(diff::add(coarse_on_target, fine_on_target), 0.5));
  if (detach_teacher) teacher = teacher.detach();
  const Tensor to_coarse =
      diff::kl_div(teacher, diff::softmax(coarse_on_target));
  const Tensor to_fine = diff::kl_div(teacher, diff::softmax(fine_on_target));
  return diff::scale(diff::add(to_coarse, to_fine), 0.5);
}

LossBundle total_objective(double coarse, double fine, double distill,
                           double lambda) {
  if (!(lambda >= 0.0)) {
    throw DomainError("trade-off lambda must be non-negative");
  }
  return {coarse, fine, distill, coarse + fine + lambda * distill, lambda};
}

Tensor combine_objective(const Tensor& coarse, const Tensor& fine,
                         const Tensor& distill, double lambda) {
  if (!(lambda >= 0.0)) {
    throw DomainError("trade-off lambda must be non-negative");
  }
  return diff::add(diff::add(coarse, fine), diff::scale(distill, lambda));
}

Tensor pair_ranking_loss(const Tensor& pos_score, const Tensor& neg_score,
                         double margin) {
  if (pos_score.size() != 1 || neg_score.size() != 1) {
    throw DimensionError("pair_ranking_loss: scores must be scalars");
  }
  if (!(margin >= 0.0)) {
    throw DomainError("pair_ranking_loss: margin must be non-negative");
  }
  const Tensor gap = diff::sub(diff::reshape(neg_score, {}),
                               diff::reshape(pos_score, {}));
  return diff::relu(diff::add(gap, Tensor::scalar(margin)));
}

}  // namespace vhd::loss
