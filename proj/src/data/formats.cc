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

#include "vhd/data/formats.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "vhd/binary_io.h"
#include "vhd/error.h"

namespace vhd::data {
namespace {

constexpr char kFeatureMagic[5] = "VHDF";

std::ifstream open_input(const std::filesystem::path& path,
                         std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) {
    throw FormatError(FormatError::Kind::kIo,
                      "cannot open " + path.string() + " for reading");
  }
  return in;
}

std::ofstream open_output(const std::filesystem::path& path,
                          std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) {
    throw FormatError(FormatError::Kind::kIo,
                      "cannot open " + path.string() + " for writing");
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::filesystem::path& p) {
  return p.is_absolute() || base.empty() ? p : base / p;
}

}  // namespace

void write_feature_file(const VideoFeatures& video,
                        const std::filesystem::path& path) {
  video.validate();
  if (video.num_segments > std::numeric_limits<std::uint32_t>::max() ||
      video.dim > std::numeric_limits<std::uint32_t>::max()) {
    throw FormatError(FormatError::Kind::kDimensionOverflow,
                      "feature matrix too large for " + path.string());
  }
  std::ofstream out = open_output(path, std::ios::binary);
  binary::write_magic(out, kFeatureMagic);
  binary::write_u32(out, kFeatureFormatVersion);
  binary::write_u32(out, static_cast<std::uint32_t>(video.num_segments));
  binary::write_u32(out, static_cast<std::uint32_t>(video.dim));
  for (float v : video.features) binary::write_f32(out, v);
  if (!out) {
    throw FormatError(FormatError::Kind::kIo, "write failed: " + path.string());
  }
}

VideoFeatures load_feature_file(const std::filesystem::path& path) {
  std::ifstream in = open_input(path, std::ios::binary);
  const std::string name = path.string();
  binary::expect_magic(in, kFeatureMagic, name);
  const std::uint32_t version = binary::read_u32(in, "version of " + name);
  if (version != kFeatureFormatVersion) {
    throw FormatError(FormatError::Kind::kBadVersion,
                      name + ": unsupported feature version " +
                          std::to_string(version));
  }
  VideoFeatures v;
  v.video_id = path.stem().string();
  v.num_segments = binary::read_u32(in, "segment count of " + name);
  v.dim = binary::read_u32(in, "dim of " + name);
  const std::uint64_t count =
      static_cast<std::uint64_t>(v.num_segments) * v.dim;
  if (v.num_segments == 0 || v.dim == 0 || count > kMaxFeatureValues) {
    throw FormatError(FormatError::Kind::kDimensionOverflow,
                      name + ": implausible shape " +
                          std::to_string(v.num_segments) + "x" +
                          std::to_string(v.dim));
  }
  v.features.resize(count);
  for (auto& f : v.features) f = binary::read_f32(in, "features of " + name);
  for (float f : v.features) {
    if (!std::isfinite(f)) {
      throw FormatError(FormatError::Kind::kMalformed,
                        name + ": non-finite feature value");
    }
  }
  return v;
}

void write_annotation_file(std::span<const double> labels,
                           const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << std::setprecision(17);
  for (double y : labels) out << y << '\n';
  if (!out) {
    throw FormatError(FormatError::Kind::kIo, "write failed: " + path.string());
  }
}

std::vector<double> load_annotation_file(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::vector<double> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    double value = 0.0;
    const auto [end, ec] =
        std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size() ||
        !std::isfinite(value)) {
      throw FormatError(FormatError::Kind::kMalformed,
                        path.string() + ":" + std::to_string(line_no) +
                            ": not a finite score: '" + std::string(text) +
                            "'");
    }
    labels.push_back(value);
  }
  return labels;
}

std::string_view split_name(Split split) {
  return split == Split::kTrain ? "train" : "test";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "test") return Split::kTest;
  throw FormatError(FormatError::Kind::kMalformed,
                    "unknown split '" + std::string(text) + "'");
}

std::vector<std::string> Manifest::categories() const {
  std::vector<std::string> out;
  for (const auto& e : entries) {
    if (std::find(out.begin(), out.end(), e.category) == out.end()) {
      out.push_back(e.category);
    }
  }
  return out;
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  Manifest manifest;
  manifest.base_dir = path.parent_path();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss{std::string(text)};
    for (std::string field; std::getline(ss, field, '\t');) {
      fields.emplace_back(trim(field));
    }
    if (fields.size() != 4) {
      throw FormatError(FormatError::Kind::kMalformed,
                        path.string() + ":" + std::to_string(line_no) +
                            ": expected 4 tab-separated fields, got " +
                            std::to_string(fields.size()));
    }
    ManifestEntry e;
    e.split = parse_split(fields[0]);
    e.category = fields[1];
    e.feature_path = fields[2];
    if (fields[3] != "-") e.annotation_path = fields[3];
    if (e.category.empty() || e.feature_path.empty()) {
      throw FormatError(FormatError::Kind::kMalformed,
                        path.string() + ":" + std::to_string(line_no) +
                            ": empty category or feature path");
    }
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

void write_manifest(const Manifest& manifest,
                    const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  for (const auto& e : manifest.entries) {
    out << split_name(e.split) << '\t' << e.category << '\t'
        << e.feature_path.generic_string() << '\t'
        << (e.annotation_path ? e.annotation_path->generic_string() : "-")
        << '\n';
  }
  if (!out) {
    throw FormatError(FormatError::Kind::kIo, "write failed: " + path.string());
  }
}

InMemoryCollection load_videos(const Manifest& manifest, Split split,
                               std::optional<std::string_view> category) {
  InMemoryCollection out;
  for (const auto& e : manifest.entries) {
    if (e.split != split) continue;
    if (category && e.category != *category) continue;
    const auto feature_path = resolve(manifest.base_dir, e.feature_path);
    VideoFeatures v = load_feature_file(feature_path);
    v.category = e.category;
    if (e.annotation_path) {
      const auto annotation_path = resolve(manifest.base_dir, *e.annotation_path);
      std::vector<double> labels = load_annotation_file(annotation_path);
      if (labels.size() != v.num_segments) {
        throw FormatError(FormatError::Kind::kShapeMismatch,
                          annotation_path.string() + " has " +
                              std::to_string(labels.size()) + " scores but " +
                              feature_path.string() + " has " +
                              std::to_string(v.num_segments) + " segments");
      }
      v.labels = std::move(labels);
    }
    out.add(std::move(v));
  }
  return out;
}

}  // namespace vhd::data
