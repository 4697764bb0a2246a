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

#include "vhd/model/params.h"

#include <cmath>
#include <random>

#include "vhd/error.h"
#include "vhd/rng.h"

namespace vhd::model {

void EncoderConfig::validate() const {
  if (num_layers == 0) throw ConfigError("num_layers must be positive");
  if (num_heads == 0) throw ConfigError("num_heads must be positive");
  if (model_dim == 0) throw ConfigError("model_dim must be positive");
  if (model_dim % num_heads != 0) {
    throw ConfigError("model_dim " + std::to_string(model_dim) +
                      " is not divisible by num_heads " +
                      std::to_string(num_heads));
  }
  if (!(ln_eps > 0.0)) throw ConfigError("ln_eps must be positive");
  if (dropout < 0.0 || dropout >= 1.0) {
    throw ConfigError("dropout must lie in [0, 1)");
  }
}

std::string_view head_role_name(HeadRole role) {
  switch (role) {
    case HeadRole::kMain: return "main";
    case HeadRole::kCoarse: return "coarse";
    case HeadRole::kFine: return "fine";
  }
  return "unknown";
}

std::optional<HeadRole> parse_head_role(std::string_view name) {
  if (name == "main") return HeadRole::kMain;
  if (name == "coarse") return HeadRole::kCoarse;
  if (name == "fine") return HeadRole::kFine;
  return std::nullopt;
}

bool ModelParams::has_head(HeadRole role) const {
  for (const auto& [r, h] : heads) {
    if (r == role) return true;
  }
  return false;
}

const HeadParams& ModelParams::head(HeadRole role) const {
  for (const auto& [r, h] : heads) {
    if (r == role) return h;
  }
  throw ConfigError("model has no " + std::string(head_role_name(role)) +
                    " head");
}

std::vector<NamedTensor> ModelParams::named_parameters() const {
  std::vector<NamedTensor> out;
  if (encoder) {
    const EncoderParams& e = *encoder;
    if (e.input_weight) {
      out.push_back({"encoder.input.weight", *e.input_weight});
      out.push_back({"encoder.input.bias", *e.input_bias});
    }
    for (std::size_t i = 0; i < e.layers.size(); ++i) {
      const LayerParams& l = e.layers[i];
      const std::string p = "encoder.layers." + std::to_string(i) + ".";
      out.push_back({p + "ln1.gain", l.ln1_gain});
      out.push_back({p + "ln1.bias", l.ln1_bias});
      out.push_back({p + "attn.query", l.query});
      out.push_back({p + "attn.key", l.key});
      out.push_back({p + "attn.value", l.value});
      out.push_back({p + "attn.output", l.output});
      out.push_back({p + "ln2.gain", l.ln2_gain});
      out.push_back({p + "ln2.bias", l.ln2_bias});
      out.push_back({p + "ffn.w1", l.ffn_w1});
      out.push_back({p + "ffn.b1", l.ffn_b1});
      out.push_back({p + "ffn.w2", l.ffn_w2});
      out.push_back({p + "ffn.b2", l.ffn_b2});
    }
    if (e.final_gain) {
      out.push_back({"encoder.final_norm.gain", *e.final_gain});
      out.push_back({"encoder.final_norm.bias", *e.final_bias});
    }
  }
  for (const auto& [role, h] : heads) {
    const std::string p = "heads." + std::string(head_role_name(role)) + ".";
    out.push_back({p + "fc1.weight", h.fc1_weight});
    out.push_back({p + "fc1.bias", h.fc1_bias});
    out.push_back({p + "fc2.weight", h.fc2_weight});
    out.push_back({p + "fc2.bias", h.fc2_bias});
    out.push_back({p + "fc3.weight", h.fc3_weight});
    out.push_back({p + "fc3.bias", h.fc3_bias});
  }
  return out;
}

std::vector<Tensor> ModelParams::parameters() const {
  std::vector<Tensor> out;
  for (auto& nt : named_parameters()) out.push_back(nt.tensor);
  return out;
}

std::vector<Tensor> ModelParams::encoder_parameters() const {
  std::vector<Tensor> out;
  for (auto& nt : named_parameters()) {
    if (nt.name.starts_with("encoder.")) out.push_back(nt.tensor);
  }
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor& t : parameters()) n += t.size();
  return n;
}

namespace {

HeadParams clone_head(const HeadParams& h) {
  return {h.fc1_weight.clone(), h.fc1_bias.clone(), h.fc2_weight.clone(),
          h.fc2_bias.clone(),   h.fc3_weight.clone(), h.fc3_bias.clone()};
}

std::optional<Tensor> clone_optional(const std::optional<Tensor>& t) {
  if (!t) return std::nullopt;
  return t->clone();
}

}  // namespace

ModelParams ModelParams::clone() const {
  ModelParams out;
  out.config = config;
  if (encoder) {
    EncoderParams e;
    e.input_weight = clone_optional(encoder->input_weight);
    e.input_bias = clone_optional(encoder->input_bias);
    for (const LayerParams& l : encoder->layers) {
      e.layers.push_back({l.ln1_gain.clone(), l.ln1_bias.clone(),
                          l.query.clone(), l.key.clone(), l.value.clone(),
                          l.output.clone(), l.ln2_gain.clone(),
                          l.ln2_bias.clone(), l.ffn_w1.clone(),
                          l.ffn_b1.clone(), l.ffn_w2.clone(),
                          l.ffn_b2.clone()});
    }
    e.final_gain = clone_optional(encoder->final_gain);
    e.final_bias = clone_optional(encoder->final_bias);
    out.encoder = std::move(e);
  }
  for (const auto& [role, h] : heads) out.heads.emplace_back(role, clone_head(h));
  return out;
}

void ModelParams::set_requires_grad(bool flag) {
  for (Tensor t : parameters()) t.set_requires_grad(flag);
}

void ModelParams::zero_grad() {
  for (Tensor t : parameters()) t.zero_grad();
}

void round_to_float(Tensor& t) {
  for (double& v : t.mutable_values()) {
    v = static_cast<double>(static_cast<float>(v));
  }
}

namespace {

class Initializer {
 public:
  explicit Initializer(std::uint64_t seed) : rng_(seed) {}

  Tensor weight(std::size_t fan_in, std::size_t fan_out) {
    const double bound =
        std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    std::vector<double> values(fan_in * fan_out);
    for (double& v : values) v = dist(rng_);
    Tensor t = Tensor::from_vector({fan_in, fan_out}, std::move(values));
    round_to_float(t);
    return t;
  }

  static Tensor zeros(std::size_t n) { return Tensor::zeros({n}); }
  static Tensor ones(std::size_t n) { return Tensor::full({n}, 1.0); }

 private:
  Rng rng_;
};

HeadParams init_head(Initializer& init, std::size_t d) {
  return {init.weight(d, kHeadHidden1),
          Initializer::zeros(kHeadHidden1),
          init.weight(kHeadHidden1, kHeadHidden2),
          Initializer::zeros(kHeadHidden2),
          init.weight(kHeadHidden2, 1),
          Initializer::zeros(1)};
}

}  // namespace

ModelParams init_params(const EncoderConfig& config,
                        std::span<const HeadRole> roles, std::uint64_t seed,
                        bool with_encoder) {
  config.validate();
  if (roles.empty()) throw ConfigError("a model needs at least one head");
  Initializer init(seed);
  ModelParams params;
  params.config = config;
  const std::size_t d = config.model_dim;
  if (with_encoder) {
    EncoderParams e;
    if (config.has_input_projection()) {
      e.input_weight = init.weight(config.input_dim, d);
      e.input_bias = Initializer::zeros(d);
    }
    const std::size_t f = config.resolved_ffn_dim();
    for (std::size_t i = 0; i < config.num_layers; ++i) {
      LayerParams l;
      l.ln1_gain = Initializer::ones(d);
      l.ln1_bias = Initializer::zeros(d);
      l.query = init.weight(d, d);
      l.key = init.weight(d, d);
      l.value = init.weight(d, d);
      l.output = init.weight(d, d);
      l.ln2_gain = Initializer::ones(d);
      l.ln2_bias = Initializer::zeros(d);
      l.ffn_w1 = init.weight(d, f);
      l.ffn_b1 = Initializer::zeros(f);
      l.ffn_w2 = init.weight(f, d);
      l.ffn_b2 = Initializer::zeros(d);
      e.layers.push_back(std::move(l));
    }
    if (config.use_final_norm) {
      e.final_gain = Initializer::ones(d);
      e.final_bias = Initializer::zeros(d);
    }
    params.encoder = std::move(e);
  }
  const std::size_t head_dim = with_encoder ? d : config.feature_dim();
  for (HeadRole role : roles) {
    if (params.has_head(role)) {
      throw ConfigError("duplicate head " +
                        std::string(head_role_name(role)));
    }
    params.heads.emplace_back(role, init_head(init, head_dim));
  }
  return params;
}

ModelParams init_params(const EncoderConfig& config, int num_scoring_heads,
                        std::uint64_t seed) {
  if (num_scoring_heads == 1) {
    const HeadRole roles[] = {HeadRole::kMain};
    return init_params(config, roles, seed);
  }
  if (num_scoring_heads == 2) {
    const HeadRole roles[] = {HeadRole::kCoarse, HeadRole::kFine};
    return init_params(config, roles, seed);
  }
  throw ConfigError("a model has one or two scoring heads");
}

}  // namespace vhd::model
