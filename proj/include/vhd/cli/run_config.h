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

#ifndef VHD_CLI_RUN_CONFIG_H_
#define VHD_CLI_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "vhd/data/synthetic.h"
#include "vhd/model/config.h"
#include "vhd/train/trainer.h"

namespace vhd::cli {

struct ConfigKey {
  std::string_view name;
  std::string_view default_value;
  std::string_view help;
};

// Every accepted key with its default, in the order used when echoing.
const std::vector<ConfigKey>& config_keys();

// Flat `key = value` configuration. Lines starting with '#' and blank lines
// are ignored; unknown keys are rejected with ConfigError; keys not given
// keep their documented defaults.
class RunConfig {
 public:
  RunConfig();

  static RunConfig from_file(const std::filesystem::path& path);
  // Parses `key = value` lines from text; `origin` names the source in errors.
  void merge_text(std::string_view text, std::string_view origin);
  // Single assignment, e.g. from --set key=value or a dedicated flag.
  void set(std::string_view key, std::string_view value);

  const std::string& get(std::string_view key) const;
  std::string get_string(std::string_view key) const { return get(key); }
  double get_double(std::string_view key) const;
  std::size_t get_size(std::string_view key) const;
  std::uint64_t get_u64(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  // Comma-separated list, entries trimmed, empty entries dropped.
  std::vector<std::string> get_list(std::string_view key) const;

  data::SynthSpec synth_spec() const;
  model::EncoderConfig encoder_config() const;
  train::TrainConfig train_config() const;

  // Every key in documented order, one `key = value` line each.
  std::string resolved_text() const;
  void write_resolved(const std::filesystem::path& path) const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace vhd::cli

#endif  // VHD_CLI_RUN_CONFIG_H_
