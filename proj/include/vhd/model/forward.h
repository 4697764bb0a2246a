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

#ifndef VHD_MODEL_FORWARD_H_
#define VHD_MODEL_FORWARD_H_

#include <vector>

#include "vhd/diffcore/tensor.h"
#include "vhd/model/params.h"
#include "vhd/rng.h"

namespace vhd::model {

struct ForwardOptions {
  // Dropout is active only when the config sets a rate and an rng is given.
  Rng* dropout_rng = nullptr;
  // When set, receives the [N x N] attention matrix of every layer and head,
  // layer-major.
  std::vector<Tensor>* attention = nullptr;
};

// Contextualizes a set of segment features z [N x feature_dim] into
// [N x model_dim]. Pre-LN residual layers with no positional information,
// so the map is permutation equivariant over rows. Without an encoder the
// input is returned unchanged.
Tensor encode_set(const ModelParams& params, const Tensor& z,
                  const ForwardOptions& options = {});

// Raw score for each row of z_tilde [N x d], rows scored independently.
// Returns a length-N vector.
Tensor score_segments(const HeadParams& head, const Tensor& z_tilde);

}  // namespace vhd::model

#endif  // VHD_MODEL_FORWARD_H_
