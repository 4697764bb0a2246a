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

#include "vhd/data/video.h"

#include <cmath>
#include <string>

#include "vhd/error.h"

namespace vhd::data {

std::span<const float> VideoFeatures::row(std::size_t segment) const {
  if (segment >= num_segments) {
    throw DomainError("segment " + std::to_string(segment) +
                      " out of range for video " + video_id + " with " +
                      std::to_string(num_segments) + " segments");
  }
  return std::span<const float>(features).subspan(segment * dim, dim);
}

diff::Tensor VideoFeatures::gather(
    std::span<const std::size_t> indices) const {
  std::vector<double> out;
  out.reserve(indices.size() * dim);
  for (std::size_t i : indices) {
    for (float v : row(i)) out.push_back(v);
  }
  return diff::Tensor::from_vector({indices.size(), dim}, std::move(out));
}

diff::Tensor VideoFeatures::matrix() const {
  return diff::Tensor::from_vector(
      {num_segments, dim}, std::vector<double>(features.begin(), features.end()));
}

void VideoFeatures::validate() const {
  if (num_segments == 0 || dim == 0) {
    throw DimensionError("video " + video_id + " has no segments or zero dim");
  }
  if (features.size() != num_segments * dim) {
    throw DimensionError("video " + video_id + ": feature buffer holds " +
                         std::to_string(features.size()) + " values, expected " +
                         std::to_string(num_segments * dim));
  }
  for (float v : features) {
    if (!std::isfinite(v)) {
      throw DomainError("video " + video_id + " has non-finite features");
    }
  }
  if (labels && labels->size() != num_segments) {
    throw DimensionError("video " + video_id + ": " +
                         std::to_string(labels->size()) + " labels for " +
                         std::to_string(num_segments) + " segments");
  }
}

std::size_t VideoCollection::dim() const {
  if (empty()) throw DomainError("empty video collection");
  const std::size_t d = video(0).dim;
  for (std::size_t i = 1; i < size(); ++i) {
    if (video(i).dim != d) {
      throw DimensionError("video " + video(i).video_id + " has dim " +
                           std::to_string(video(i).dim) + ", expected " +
                           std::to_string(d));
    }
  }
  return d;
}

}  // namespace vhd::data
