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

#include "vhd/model/checkpoint.h"

#include <algorithm>
#include <fstream>
#include <map>

#include "vhd/binary_io.h"
#include "vhd/error.h"

namespace vhd::model {

namespace {

// Guards against absurd sizes in corrupted headers before allocating.
constexpr std::uint32_t kMaxNameLength = 4096;
constexpr std::uint32_t kMaxRank = 8;

}  // namespace

void write_checkpoint_tensors(const std::filesystem::path& path,
                              const std::vector<NamedTensor>& tensors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw FormatError(FormatError::Kind::kIo,
                      "cannot open " + path.string() + " for writing");
  }
  binary::write_magic(out, kCheckpointMagic);
  binary::write_u32(out, kCheckpointVersion);
  binary::write_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const NamedTensor& nt : tensors) {
    binary::write_u32(out, static_cast<std::uint32_t>(nt.name.size()));
    out.write(nt.name.data(), static_cast<std::streamsize>(nt.name.size()));
    binary::write_u32(out, static_cast<std::uint32_t>(nt.tensor.rank()));
    for (std::size_t d : nt.tensor.shape()) {
      binary::write_u32(out, static_cast<std::uint32_t>(d));
    }
    for (double v : nt.tensor.values()) {
      binary::write_f32(out, static_cast<float>(v));
    }
  }
  if (!out) {
    throw FormatError(FormatError::Kind::kIo,
                      "write to " + path.string() + " failed");
  }
}

std::vector<NamedTensor> read_checkpoint_tensors(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError(FormatError::Kind::kIo,
                      "cannot open " + path.string());
  }
  const std::string where = path.string();
  binary::expect_magic(in, kCheckpointMagic, where);
  const std::uint32_t version = binary::read_u32(in, "version");
  if (version != kCheckpointVersion) {
    throw FormatError(FormatError::Kind::kBadVersion,
                      where + ": unsupported checkpoint version " +
                          std::to_string(version));
  }
  const std::uint32_t count = binary::read_u32(in, "tensor count");
  std::vector<NamedTensor> tensors;
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::uint32_t name_length = binary::read_u32(in, "name length");
    if (name_length > kMaxNameLength) {
      throw FormatError(FormatError::Kind::kMalformed,
                        where + ": implausible tensor name length");
    }
    std::string name(name_length, '\0');
    binary::read_exact(in, name.data(), name_length, "tensor name");
    const std::uint32_t rank = binary::read_u32(in, "rank of " + name);
    if (rank > kMaxRank) {
      throw FormatError(FormatError::Kind::kMalformed,
                        where + ": implausible rank for " + name);
    }
    diff::Shape shape;
    std::uint64_t elements = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      const std::uint32_t d = binary::read_u32(in, "shape of " + name);
      if (d == 0) {
        throw FormatError(FormatError::Kind::kMalformed,
                          where + ": zero dimension in " + name);
      }
      elements *= d;
      if (elements > (std::uint64_t{1} << 34)) {
        throw FormatError(FormatError::Kind::kDimensionOverflow,
                          where + ": tensor " + name + " is too large");
      }
      shape.push_back(d);
    }
    std::vector<double> values(elements);
    for (double& v : values) v = binary::read_f32(in, "values of " + name);
    tensors.push_back(
        {std::move(name), Tensor::from_vector(std::move(shape), std::move(values))});
  }
  return tensors;
}

void save_checkpoint(const ModelParams& params,
                     const std::filesystem::path& path) {
  write_checkpoint_tensors(path, params.named_parameters());
}

ModelParams load_checkpoint(const std::filesystem::path& path,
                            const EncoderConfig& config) {
  const std::vector<NamedTensor> stored = read_checkpoint_tensors(path);
  const std::string where = path.string();

  bool has_encoder = false;
  std::vector<HeadRole> roles;
  for (const NamedTensor& nt : stored) {
    if (nt.name.starts_with("encoder.")) has_encoder = true;
    if (nt.name.starts_with("heads.")) {
      const std::string role_name =
          nt.name.substr(6, nt.name.find('.', 6) - 6);
      const auto role = parse_head_role(role_name);
      if (!role) {
        throw FormatError(FormatError::Kind::kShapeMismatch,
                          where + ": unknown head '" + role_name + "'");
      }
      if (std::find(roles.begin(), roles.end(), *role) == roles.end()) {
        roles.push_back(*role);
      }
    }
  }
  if (roles.empty()) {
    throw FormatError(FormatError::Kind::kShapeMismatch,
                      where + ": checkpoint holds no scoring head");
  }

  // Build a skeleton with the expected names and shapes, then fill it.
  ModelParams params = init_params(config, roles, 0, has_encoder);
  std::map<std::string, const Tensor*> by_name;
  for (const NamedTensor& nt : stored) by_name[nt.name] = &nt.tensor;
  const auto expected = params.named_parameters();
  if (expected.size() != stored.size()) {
    throw FormatError(FormatError::Kind::kShapeMismatch,
                      where + ": holds " + std::to_string(stored.size()) +
                          " tensors, configuration expects " +
                          std::to_string(expected.size()));
  }
  for (const NamedTensor& nt : expected) {
    const auto it = by_name.find(nt.name);
    if (it == by_name.end()) {
      throw FormatError(FormatError::Kind::kShapeMismatch,
                        where + ": missing tensor " + nt.name);
    }
    if (it->second->shape() != nt.tensor.shape()) {
      throw FormatError(FormatError::Kind::kShapeMismatch,
                        where + ": tensor " + nt.name + " has shape " +
                            diff::shape_string(it->second->shape()) +
                            ", configuration expects " +
                            diff::shape_string(nt.tensor.shape()));
    }
    Tensor target = nt.tensor;
    const auto src = it->second->values();
    std::copy(src.begin(), src.end(), target.mutable_values().begin());
  }
  return params;
}

}  // namespace vhd::model
