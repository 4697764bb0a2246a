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

#ifndef VHD_MODEL_CONFIG_H_
#define VHD_MODEL_CONFIG_H_

#include <cstddef>

namespace vhd::model {

// Hidden widths of every scoring head: d -> 1024 -> 256 -> 1.
inline constexpr std::size_t kHeadHidden1 = 1024;
inline constexpr std::size_t kHeadHidden2 = 256;

struct EncoderConfig {
  std::size_t num_layers = 5;
  std::size_t num_heads = 8;
  // Width of the residual stream. Heads consume vectors of this size.
  std::size_t model_dim = 4096;
  // 0 means 4 * model_dim.
  std::size_t ffn_dim = 0;
  bool use_final_norm = true;
  double ln_eps = 1e-5;
  // Dimension of the incoming segment features. 0 means "equal to
  // model_dim", in which case no input projection exists.
  std::size_t input_dim = 0;
  double dropout = 0.0;

  std::size_t resolved_ffn_dim() const {
    return ffn_dim == 0 ? 4 * model_dim : ffn_dim;
  }
  std::size_t feature_dim() const {
    return input_dim == 0 ? model_dim : input_dim;
  }
  bool has_input_projection() const {
    return input_dim != 0 && input_dim != model_dim;
  }

  // Throws ConfigError when the configuration is unusable.
  void validate() const;
};

}  // namespace vhd::model

#endif  // VHD_MODEL_CONFIG_H_
