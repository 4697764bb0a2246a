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

#include "vhd/cli/run_config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vhd/error.h"

namespace vhd::cli {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

const ConfigKey* find_key(std::string_view name) {
  for (const auto& k : config_keys()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"seed", "0", "root seed; component streams are derived from it"},
      {"data.manifest", "", "manifest of features and annotations"},
      {"data.category", "", "set-based training category (empty: all)"},
      {"data.source_category", "source", "labeled category"},
      {"data.target_category", "target", "unlabeled category to adapt to"},
      {"synth.dim", "32", "feature dimension"},
      {"synth.categories", "source,target", "category names"},
      {"synth.alpha", "0.5", "weight of the shared highlight direction"},
      {"synth.beta", "1", "weight of the private highlight direction"},
      {"synth.prototype_scale", "0", "length of category prototypes"},
      {"synth.rho", "0.2", "scale of the per-video offset"},
      {"synth.noise", "0.15", "per-coordinate noise scale"},
      {"synth.videos_per_category", "100", "videos per category"},
      {"synth.segments_per_video", "40", "segments per video"},
      {"synth.test_fraction", "0.2", "fraction of videos held out for test"},
      {"synth.continuous_labels", "false", "write h instead of [h > 0.5]"},
      {"synth.unlabeled_train_categories", "target",
       "categories whose train videos get no annotation file"},
      {"model.model_dim", "32", "encoder width"},
      {"model.num_layers", "2", "encoder layers"},
      {"model.num_heads", "4", "attention heads"},
      {"model.ffn_dim", "0", "feed-forward width (0: 4 * model_dim)"},
      {"model.input_dim", "0", "feature width if it differs from model_dim"},
      {"model.use_final_norm", "true", "layer norm after the last layer"},
      {"model.ln_eps", "1e-05", "layer norm epsilon"},
      {"model.dropout", "0", "dropout rate inside the encoder"},
      {"train.epochs", "50", "training epochs"},
      {"train.lr_decay_every", "20", "epochs between learning rate decays"},
      {"train.lr_decay_factor", "0.1", "learning rate decay factor"},
      {"train.base_lr", "0.001", "initial learning rate"},
      {"train.momentum", "0.9", "SGD momentum"},
      {"train.weight_decay", "0.0005", "L2 weight decay"},
      {"train.set_size", "20", "segments per training set and window"},
      {"train.lambda", "1", "weight of the distillation loss"},
      {"train.steps_per_epoch", "0", "steps per epoch (0: one per video)"},
      {"train.ablation", "none",
       "none | no-transformer | coarse-only | fine-only | no-distill"},
      {"train.detach_teacher", "true", "stop gradients through the teacher"},
      {"train.clip_norm", "0", "global gradient norm cap (0: off)"},
      {"train.fp32_params", "true", "keep parameters single precision"},
      {"eval.mode", "auto", "auto | sl | coarse | fine | averaged"},
      {"eval.split", "test", "split scored by score/eval"},
      {"eval.category", "", "category scored by score/eval (empty: all)"},
      {"eval.top_k", "0", "also report top-k mAP when > 0"},
      {"eval.threshold", "0.5", "labels >= threshold count as positive"},
      {"sweep.mode", "dl", "sl | dl"},
  };
  return keys;
}

RunConfig::RunConfig() {
  for (const auto& k : config_keys()) {
    values_.emplace(std::string(k.name), std::string(k.default_value));
  }
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read config file " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig c;
  c.merge_text(ss.str(), path.string());
  return c;
}

void RunConfig::merge_text(std::string_view text, std::string_view origin) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto end = text.find('\n');
    const std::string_view line = trim(text.substr(0, end));
    text = end == std::string_view::npos ? std::string_view{}
                                         : text.substr(end + 1);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    try {
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) +
                        ": " + e.what());
    }
  }
}

void RunConfig::set(std::string_view key, std::string_view value) {
  if (find_key(key) == nullptr) {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
  values_[std::string(key)] = std::string(trim(value));
}

const std::string& RunConfig::get(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
  return it->second;
}

double RunConfig::get_double(std::string_view key) const {
  const std::string& s = get(key);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(std::string(key) + ": '" + s + "' is not a number");
  }
  return v;
}

std::uint64_t RunConfig::get_u64(std::string_view key) const {
  const std::string& s = get(key);
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw ConfigError(std::string(key) + ": '" + s +
                      "' is not a non-negative integer");
  }
  return v;
}

std::size_t RunConfig::get_size(std::string_view key) const {
  return static_cast<std::size_t>(get_u64(key));
}

bool RunConfig::get_bool(std::string_view key) const {
  const std::string& s = get(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(std::string(key) + ": '" + s + "' is not a boolean");
}

std::vector<std::string> RunConfig::get_list(std::string_view key) const {
  std::vector<std::string> out;
  std::string_view rest = get(key);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = trim(rest.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    rest = comma == std::string_view::npos ? std::string_view{}
                                           : rest.substr(comma + 1);
  }
  return out;
}

data::SynthSpec RunConfig::synth_spec() const {
  data::SynthSpec s;
  s.dim = get_size("synth.dim");
  s.categories.clear();
  for (const auto& name : get_list("synth.categories")) {
    s.categories.push_back({name, {}, {}});
  }
  s.alpha = get_double("synth.alpha");
  s.beta = get_double("synth.beta");
  s.prototype_scale = get_double("synth.prototype_scale");
  s.rho = get_double("synth.rho");
  s.noise = get_double("synth.noise");
  s.videos_per_category = get_size("synth.videos_per_category");
  s.segments_per_video = get_size("synth.segments_per_video");
  s.test_fraction = get_double("synth.test_fraction");
  s.continuous_labels = get_bool("synth.continuous_labels");
  return s;
}

model::EncoderConfig RunConfig::encoder_config() const {
  model::EncoderConfig m;
  m.model_dim = get_size("model.model_dim");
  m.num_layers = get_size("model.num_layers");
  m.num_heads = get_size("model.num_heads");
  m.ffn_dim = get_size("model.ffn_dim");
  m.input_dim = get_size("model.input_dim");
  m.use_final_norm = get_bool("model.use_final_norm");
  m.ln_eps = get_double("model.ln_eps");
  m.dropout = get_double("model.dropout");
  m.validate();
  return m;
}

train::TrainConfig RunConfig::train_config() const {
  train::TrainConfig t;
  t.epochs = get_size("train.epochs");
  t.lr_decay_every = get_size("train.lr_decay_every");
  t.lr_decay_factor = get_double("train.lr_decay_factor");
  t.base_lr = get_double("train.base_lr");
  t.momentum = get_double("train.momentum");
  t.weight_decay = get_double("train.weight_decay");
  t.set_size = get_size("train.set_size");
  t.lambda = get_double("train.lambda");
  t.steps_per_epoch = get_size("train.steps_per_epoch");
  t.seed = get_u64("seed");
  t.ablation = train::parse_ablation(get("train.ablation"));
  t.detach_teacher = get_bool("train.detach_teacher");
  t.clip_norm = get_double("train.clip_norm");
  t.fp32_params = get_bool("train.fp32_params");
  return t;
}

std::string RunConfig::resolved_text() const {
  std::string out;
  for (const auto& k : config_keys()) {
    out += std::string(k.name) + " = " + get(k.name) + "\n";
  }
  return out;
}

void RunConfig::write_resolved(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw FormatError(FormatError::Kind::kIo,
                      "cannot open " + path.string() + " for writing");
  }
  out << resolved_text();
}

}  // namespace vhd::cli
