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

#include "vhd/model/forward.h"

#include <cmath>
#include <string>

#include "vhd/diffcore/ops.h"
#include "vhd/error.h"

namespace vhd::model {

namespace {

using diff::add;
using diff::add_bias;
using diff::layer_norm;
using diff::matmul;
using diff::relu;

Tensor maybe_dropout(const Tensor& x, const EncoderConfig& config,
                     const ForwardOptions& options) {
  if (config.dropout <= 0.0 || options.dropout_rng == nullptr) return x;
  return diff::dropout(x, config.dropout, *options.dropout_rng);
}

Tensor self_attention(const Tensor& h, const LayerParams& layer,
                      const EncoderConfig& config,
                      const ForwardOptions& options) {
  const std::size_t heads = config.num_heads;
  const std::size_t head_dim = config.model_dim / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  const Tensor q = matmul(h, layer.query);
  const Tensor k = matmul(h, layer.key);
  const Tensor v = matmul(h, layer.value);
  std::vector<Tensor> outputs;
  outputs.reserve(heads);
  for (std::size_t i = 0; i < heads; ++i) {
    const std::size_t offset = i * head_dim;
    const Tensor qh = heads == 1 ? q : diff::slice(q, 1, offset, head_dim);
    const Tensor kh = heads == 1 ? k : diff::slice(k, 1, offset, head_dim);
    const Tensor vh = heads == 1 ? v : diff::slice(v, 1, offset, head_dim);
    const Tensor weights = diff::softmax_rows(
        diff::scale(matmul(qh, diff::transpose(kh)), inv_sqrt));
    if (options.attention != nullptr) options.attention->push_back(weights);
    outputs.push_back(matmul(weights, vh));
  }
  const Tensor merged = heads == 1 ? outputs[0] : diff::concat(outputs, 1);
  return matmul(merged, layer.output);
}

}  // namespace

Tensor encode_set(const ModelParams& params, const Tensor& z,
                  const ForwardOptions& options) {
  const EncoderConfig& config = params.config;
  if (z.rank() != 2) {
    throw DimensionError("encode_set: expected an [N x d] set, got " +
                         diff::shape_string(z.shape()));
  }
  if (z.dim(1) != config.feature_dim()) {
    throw DimensionError("encode_set: feature width " +
                         std::to_string(z.dim(1)) + " does not match " +
                         std::to_string(config.feature_dim()));
  }
  if (!params.encoder) return z;
  const EncoderParams& e = *params.encoder;

  Tensor x = z;
  if (e.input_weight) x = add_bias(matmul(z, *e.input_weight), *e.input_bias);
  for (const LayerParams& layer : e.layers) {
    const Tensor attn = self_attention(
        layer_norm(x, layer.ln1_gain, layer.ln1_bias, config.ln_eps), layer,
        config, options);
    x = add(x, maybe_dropout(attn, config, options));
    const Tensor hidden = relu(add_bias(
        matmul(layer_norm(x, layer.ln2_gain, layer.ln2_bias, config.ln_eps),
               layer.ffn_w1),
        layer.ffn_b1));
    const Tensor ffn = add_bias(matmul(hidden, layer.ffn_w2), layer.ffn_b2);
    x = add(x, maybe_dropout(ffn, config, options));
  }
  if (e.final_gain) x = layer_norm(x, *e.final_gain, *e.final_bias, config.ln_eps);
  return x;
}

Tensor score_segments(const HeadParams& head, const Tensor& z_tilde) {
  if (z_tilde.rank() != 2 || z_tilde.dim(1) != head.fc1_weight.dim(0)) {
    throw DimensionError("score_segments: embeddings " +
                         diff::shape_string(z_tilde.shape()) +
                         " do not match head input width " +
                         std::to_string(head.fc1_weight.dim(0)));
  }
  const Tensor h1 =
      relu(add_bias(matmul(z_tilde, head.fc1_weight), head.fc1_bias));
  const Tensor h2 = relu(add_bias(matmul(h1, head.fc2_weight), head.fc2_bias));
  const Tensor out = add_bias(matmul(h2, head.fc3_weight), head.fc3_bias);
  return diff::reshape(out, {z_tilde.dim(0)});
}

}  // namespace vhd::model
