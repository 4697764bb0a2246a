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

#ifndef VHD_DATA_VIDEO_H_
#define VHD_DATA_VIDEO_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vhd/diffcore/tensor.h"

namespace vhd::data {

// Per-segment features of one video, rows in temporal order.
struct VideoFeatures {
  std::string video_id;
  std::string category;
  std::size_t num_segments = 0;
  std::size_t dim = 0;
  // Row-major num_segments x dim.
  std::vector<float> features;
  std::optional<std::vector<double>> labels;

  std::span<const float> row(std::size_t segment) const;
  // Rows gathered into a [indices.size() x dim] tensor; indices may repeat.
  diff::Tensor gather(std::span<const std::size_t> indices) const;
  // The whole video as a [num_segments x dim] tensor.
  diff::Tensor matrix() const;

  bool has_labels() const { return labels.has_value(); }

  // Throws DimensionError / DomainError when the invariants do not hold:
  // at least one segment, features sized num_segments * dim, finite rows,
  // and a label per segment when labels are present.
  void validate() const;
};

// Read access to a list of videos. Training code goes through this
// interface so callers can substitute lazily loaded or instrumented corpora.
class VideoCollection {
 public:
  virtual ~VideoCollection() = default;
  virtual std::size_t size() const = 0;
  virtual const VideoFeatures& video(std::size_t i) const = 0;

  bool empty() const { return size() == 0; }
  // Feature width shared by all videos; DimensionError when they disagree
  // and DomainError when the collection is empty.
  std::size_t dim() const;
};

class InMemoryCollection : public VideoCollection {
 public:
  InMemoryCollection() = default;
  explicit InMemoryCollection(std::vector<VideoFeatures> videos)
      : videos_(std::move(videos)) {}

  std::size_t size() const override { return videos_.size(); }
  const VideoFeatures& video(std::size_t i) const override {
    return videos_.at(i);
  }
  const std::vector<VideoFeatures>& videos() const { return videos_; }
  void add(VideoFeatures v) { videos_.push_back(std::move(v)); }

 private:
  std::vector<VideoFeatures> videos_;
};

}  // namespace vhd::data

#endif  // VHD_DATA_VIDEO_H_
