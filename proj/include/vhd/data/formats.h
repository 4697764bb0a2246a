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

#ifndef VHD_DATA_FORMATS_H_
#define VHD_DATA_FORMATS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vhd/data/video.h"

namespace vhd::data {

inline constexpr std::uint32_t kFeatureFormatVersion = 1;
// Upper bound on segments * dim accepted from a feature header.
inline constexpr std::uint64_t kMaxFeatureValues = std::uint64_t{1} << 32;

// "VHDF", u32 version, u32 segments, u32 dim, then row-major f32 values,
// all little-endian.
void write_feature_file(const VideoFeatures& video,
                        const std::filesystem::path& path);
// video_id is set to the file stem; category and labels are left empty.
VideoFeatures load_feature_file(const std::filesystem::path& path);

// One decimal score per line.
void write_annotation_file(std::span<const double> labels,
                           const std::filesystem::path& path);
std::vector<double> load_annotation_file(const std::filesystem::path& path);

enum class Split { kTrain, kTest };
std::string_view split_name(Split split);
Split parse_split(std::string_view text);

struct ManifestEntry {
  Split split = Split::kTrain;
  std::string category;
  std::filesystem::path feature_path;
  std::optional<std::filesystem::path> annotation_path;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  // Relative paths in entries are resolved against this directory.
  std::filesystem::path base_dir;

  std::vector<std::string> categories() const;
};

// Tab-separated: split, category, feature path, annotation path or "-".
// Blank lines and lines starting with '#' are skipped.
Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& manifest,
                    const std::filesystem::path& path);

// Loads every entry matching the split and, when given, the category.
// Feature/annotation length disagreements raise a kShapeMismatch
// FormatError naming both files.
InMemoryCollection load_videos(const Manifest& manifest, Split split,
                               std::optional<std::string_view> category = {});

}  // namespace vhd::data

#endif  // VHD_DATA_FORMATS_H_
