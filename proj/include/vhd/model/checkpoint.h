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

#ifndef VHD_MODEL_CHECKPOINT_H_
#define VHD_MODEL_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "vhd/model/params.h"

namespace vhd::model {

inline constexpr char kCheckpointMagic[5] = "SHLC";
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout (all integers u32 little-endian):
//   "SHLC" | version | tensor count |
//   per tensor: name length, UTF-8 name, rank, dims..., f32 LE values
void write_checkpoint_tensors(const std::filesystem::path& path,
                              const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_checkpoint_tensors(
    const std::filesystem::path& path);

void save_checkpoint(const ModelParams& params,
                     const std::filesystem::path& path);

// Loads parameters for `config`. Which heads exist, and whether an encoder is
// present, is read from the file. Throws FormatError with kBadMagic,
// kBadVersion, kTruncated, or kShapeMismatch.
ModelParams load_checkpoint(const std::filesystem::path& path,
                            const EncoderConfig& config);

}  // namespace vhd::model

#endif  // VHD_MODEL_CHECKPOINT_H_
