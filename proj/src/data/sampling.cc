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

#include "vhd/data/sampling.h"

#include <algorithm>
#include <numeric>
#include <random>

#include "vhd/diffcore/ops.h"
#include "vhd/error.h"

namespace vhd::data {
namespace {

std::vector<std::size_t> sample_indices(std::size_t available, std::size_t n,
                                        Rng& rng) {
  std::vector<std::size_t> all(available);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (available >= n) {
    std::vector<std::size_t> picked;
    picked.reserve(n);
    std::sample(all.begin(), all.end(), std::back_inserter(picked), n, rng);
    return picked;
  }
  std::uniform_int_distribution<std::size_t> pick(0, available - 1);
  while (all.size() < n) all.push_back(pick(rng));
  return all;
}

SegmentSet sample_from(const VideoFeatures& video, std::size_t n, Rng& rng,
                       SetKind kind) {
  if (n < 2) throw DomainError("set size must be at least 2");
  const auto indices = sample_indices(video.num_segments, n, rng);
  SegmentSet set;
  set.kind = kind;
  set.members.reserve(n);
  for (std::size_t i : indices) {
    SetMember m{video.video_id, i, std::nullopt};
    if (kind == SetKind::kSource) m.label = (*video.labels)[i];
    set.members.push_back(std::move(m));
  }
  set.features = video.gather(indices);
  return set;
}

}  // namespace

std::string_view set_kind_name(SetKind kind) {
  switch (kind) {
    case SetKind::kSource:
      return "source";
    case SetKind::kTarget:
      return "target";
    case SetKind::kMixed:
      return "mixed";
  }
  return "?";
}

diff::Tensor SegmentSet::labels() const {
  std::vector<double> out;
  out.reserve(members.size());
  for (const auto& m : members) {
    if (!m.label) {
      throw DomainError(std::string(set_kind_name(kind)) +
                        " set has unlabeled members");
    }
    out.push_back(*m.label);
  }
  return diff::Tensor::vector(std::move(out));
}

SegmentSet sample_training_set(const VideoFeatures& video, std::size_t n,
                               Rng& rng) {
  if (!video.has_labels()) {
    throw DomainError("video " + video.video_id +
                      " has no labels; cannot build a training set");
  }
  return sample_from(video, n, rng, SetKind::kSource);
}

SegmentSet sample_target_set(const VideoFeatures& video, std::size_t n,
                             Rng& rng) {
  return sample_from(video, n, rng, SetKind::kTarget);
}

SegmentSet build_mixed_set(const SegmentSet& source, const SegmentSet& target,
                           Rng& rng) {
  const std::size_t n = source.size();
  if (target.size() != n) {
    throw DimensionError("mixed set inputs differ in size: " +
                         std::to_string(n) + " vs " +
                         std::to_string(target.size()));
  }
  if (n % 2 != 0) {
    throw DomainError("mixed set size must be even, got " + std::to_string(n));
  }
  const std::size_t half = n / 2;
  const auto from_source = sample_indices(n, half, rng);
  const auto from_target = sample_indices(n, half, rng);

  struct Pick {
    const SegmentSet* set;
    std::size_t row;
    double label;
  };
  std::vector<Pick> picks;
  picks.reserve(n);
  for (std::size_t i : from_source) picks.push_back({&source, i, 0.0});
  for (std::size_t i : from_target) picks.push_back({&target, i, 1.0});
  std::shuffle(picks.begin(), picks.end(), rng);

  SegmentSet mixed;
  mixed.kind = SetKind::kMixed;
  const std::size_t d = source.features.dim(1);
  std::vector<double> rows;
  rows.reserve(n * d);
  for (const Pick& p : picks) {
    const SetMember& m = p.set->members[p.row];
    mixed.members.push_back({m.video_id, m.segment_index, p.label});
    const auto values = p.set->features.values().subspan(p.row * d, d);
    rows.insert(rows.end(), values.begin(), values.end());
  }
  mixed.features = diff::Tensor::from_vector({n, d}, std::move(rows));
  return mixed;
}

}  // namespace vhd::data
