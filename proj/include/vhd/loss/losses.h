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

#ifndef VHD_LOSS_LOSSES_H_
#define VHD_LOSS_LOSSES_H_

#include "vhd/diffcore/tensor.h"

// Set-level learning objectives. Each KL-based loss compares a target
// distribution (first argument, after softmax) with a predicted one; all of
// them are invariant to adding a constant to a whole score vector.
namespace vhd::loss {

using diff::Tensor;

// D_KL(softmax(labels) || softmax(scores)). Labels are constants; they may be
// binary or continuous and are used without rescaling. Requires two or more
// entries.
Tensor set_pred_loss(const Tensor& labels, const Tensor& scores);

// Same objective on a mixed set, with labels 1 for target-category members
// and 0 for source members. Any other label value is a DomainError.
Tensor coarse_loss(const Tensor& mixed_labels, const Tensor& coarse_scores);

// Supervised objective of the fine-grained learner on a source set.
Tensor fine_loss(const Tensor& source_labels, const Tensor& fine_scores);

// Mutual distillation on a target set. Both learners are pulled towards the
// softmax of their averaged raw scores:
//   1/2 [ KL(s(avg) || s(coarse)) + KL(s(avg) || s(fine)) ].
// With detach_teacher the averaged distribution is a constant.
Tensor distill_loss(const Tensor& coarse_on_target,
                    const Tensor& fine_on_target, bool detach_teacher = true);

struct LossBundle {
  double coarse = 0.0;
  double fine = 0.0;
  double distill = 0.0;
  double total = 0.0;
  double lambda = 1.0;
};

// total = coarse + fine + lambda * distill. Negative lambda is a DomainError.
LossBundle total_objective(double coarse, double fine, double distill,
                           double lambda);

// Differentiable form of the same combination.
Tensor combine_objective(const Tensor& coarse, const Tensor& fine,
                         const Tensor& distill, double lambda);

// max(0, margin - pos + neg), the pairwise baseline.
Tensor pair_ranking_loss(const Tensor& pos_score, const Tensor& neg_score,
                         double margin = 1.0);

}  // namespace vhd::loss

#endif  // VHD_LOSS_LOSSES_H_
