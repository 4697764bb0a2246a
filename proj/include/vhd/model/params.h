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

#ifndef VHD_MODEL_PARAMS_H_
#define VHD_MODEL_PARAMS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vhd/diffcore/tensor.h"
#include "vhd/model/config.h"

namespace vhd::model {

using diff::Tensor;

// Which scoring head: the single head of a set-learning model, or one of the
// two learners of the dual-learner model.
enum class HeadRole { kMain, kCoarse, kFine };

std::string_view head_role_name(HeadRole role);
std::optional<HeadRole> parse_head_role(std::string_view name);

struct HeadParams {
  Tensor fc1_weight, fc1_bias;  // [d x 1024], [1024]
  Tensor fc2_weight, fc2_bias;  // [1024 x 256], [256]
  Tensor fc3_weight, fc3_bias;  // [256 x 1], [1]
};

struct LayerParams {
  Tensor ln1_gain, ln1_bias;
  // Attention projections, [d x d] each, no biases.
  Tensor query, key, value, output;
  Tensor ln2_gain, ln2_bias;
  Tensor ffn_w1, ffn_b1;  // [d x f], [f]
  Tensor ffn_w2, ffn_b2;  // [f x d], [d]
};

struct EncoderParams {
  std::optional<Tensor> input_weight, input_bias;
  std::vector<LayerParams> layers;
  std::optional<Tensor> final_gain, final_bias;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// Parameters of the encoder and scoring heads. Tensor members are shared
// handles, so copying a ModelParams aliases the storage; clone() gives an
// independent snapshot.
struct ModelParams {
  EncoderConfig config;
  // Absent for the configuration that scores raw features directly.
  std::optional<EncoderParams> encoder;
  std::vector<std::pair<HeadRole, HeadParams>> heads;

  bool has_head(HeadRole role) const;
  const HeadParams& head(HeadRole role) const;

  // Stable order: encoder first, then heads in insertion order.
  std::vector<NamedTensor> named_parameters() const;
  std::vector<Tensor> parameters() const;
  std::vector<Tensor> encoder_parameters() const;
  std::size_t parameter_count() const;

  ModelParams clone() const;
  void set_requires_grad(bool flag);
  void zero_grad();
};

// Glorot-uniform weights, zero biases, unit LN gains, deterministic in
// `seed`. Values are rounded to single precision so that a fresh model
// survives a checkpoint round trip unchanged.
ModelParams init_params(const EncoderConfig& config,
                        std::span<const HeadRole> roles, std::uint64_t seed,
                        bool with_encoder = true);

// 1 -> {kMain}; 2 -> {kCoarse, kFine}.
ModelParams init_params(const EncoderConfig& config, int num_scoring_heads,
                        std::uint64_t seed);

// Rounds every value to the nearest float, in place.
void round_to_float(Tensor& t);

}  // namespace vhd::model

#endif  // VHD_MODEL_PARAMS_H_
