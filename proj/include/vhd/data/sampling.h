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

#ifndef VHD_DATA_SAMPLING_H_
#define VHD_DATA_SAMPLING_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vhd/data/video.h"
#include "vhd/diffcore/tensor.h"
#include "vhd/rng.h"

namespace vhd::data {

enum class SetKind { kSource, kTarget, kMixed };
std::string_view set_kind_name(SetKind kind);

struct SetMember {
  std::string video_id;
  std::size_t segment_index = 0;
  // Highlight label for source sets, category label (1 = target) for mixed
  // sets, absent for unlabeled target sets.
  std::optional<double> label;
};

struct SegmentSet {
  SetKind kind = SetKind::kSource;
  std::vector<SetMember> members;
  // [members.size() x d], row i belongs to members[i].
  diff::Tensor features;

  std::size_t size() const { return members.size(); }
  // Labels as a rank-1 tensor; DomainError if any member is unlabeled.
  diff::Tensor labels() const;
};

// N segments of one labeled video: without replacement when the video has
// at least N segments, otherwise every segment once plus uniform draws with
// replacement for the remainder.
SegmentSet sample_training_set(const VideoFeatures& video, std::size_t n,
                               Rng& rng);

// Same sampling rule for a target video; labels are never read.
SegmentSet sample_target_set(const VideoFeatures& video, std::size_t n,
                             Rng& rng);

// N/2 members drawn without replacement from each input set, labeled 0
// (from `source`) or 1 (from `target`), then shuffled.
SegmentSet build_mixed_set(const SegmentSet& source, const SegmentSet& target,
                           Rng& rng);

}  // namespace vhd::data

#endif  // VHD_DATA_SAMPLING_H_
