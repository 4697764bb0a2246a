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

#ifndef VHD_EVAL_EVAL_H_
#define VHD_EVAL_EVAL_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vhd/data/video.h"
#include "vhd/model/params.h"

namespace vhd::eval {

struct InferenceWindow {
  // Segment indices in temporal order; edge segments may repeat.
  std::vector<std::size_t> members;
  // Position of the evaluated segment within members.
  std::size_t center_pos = 0;
};

// Context window of n members around segment s of a video with num_segments
// segments: floor((n - 1) / 2) predecessors and the rest successors. A side
// that runs past the video boundary hands its deficit to the other side.
// When the video is shorter than n, every segment is used once and the
// missing members duplicate an edge segment: each short side repeats its
// own edge, or the far edge when only one side is short.
InferenceWindow build_window(std::size_t num_segments, std::size_t s,
                             std::size_t n);

enum class ScoreMode { kSl, kCoarse, kFine, kAveraged };
std::string_view score_mode_name(ScoreMode mode);
ScoreMode parse_score_mode(std::string_view text);

struct ScoreTrack {
  std::string video_id;
  std::string category;
  std::vector<double> scores;
  ScoreMode mode = ScoreMode::kSl;
};

// Scores every segment from its own inference window: the window is
// encoded as a set and only the evaluated segment's row is scored. The
// averaged mode returns (coarse + fine) / 2. ConfigError when the model
// lacks a head the mode needs.
ScoreTrack score_video(const model::ModelParams& params,
                       const data::VideoFeatures& video, std::size_t set_size,
                       ScoreMode mode);

std::vector<ScoreTrack> score_collection(const model::ModelParams& params,
                                         const data::VideoCollection& videos,
                                         std::size_t set_size, ScoreMode mode);

// Average precision of the ranking by descending score (ties broken by
// ascending index) against 0/1 labels. DomainError without positives.
double average_precision(std::span<const double> scores,
                         std::span<const double> labels);

// AP of the ranking truncated to the k highest-scored segments: precision
// at each positive within the top k, averaged over those positives; 0 when
// none of them is positive.
double truncated_average_precision(std::span<const double> scores,
                                   std::span<const double> labels,
                                   std::size_t k);

// Labels >= threshold count as positive.
std::vector<double> binarize(std::span<const double> labels, double threshold);

// Unweighted mean of per-video AP over videos with at least one positive;
// videos without positives are skipped with a warning. annotations[i]
// belongs to tracks[i]. DomainError when no video is evaluable.
double mean_ap(std::span<const ScoreTrack> tracks,
               std::span<const std::vector<double>> annotations,
               double threshold = 0.5);

// Mean truncated AP over the same evaluable videos as mean_ap.
double top_k_map(std::span<const ScoreTrack> tracks,
                 std::span<const std::vector<double>> annotations,
                 std::size_t k, double threshold = 0.5);

struct MetricRow {
  std::string metric;
  std::string category;
  double value = 0.0;
};

// Per category of the collection: "map" and, when top_k > 0, "top<k>_map".
// Videos must carry labels.
std::vector<MetricRow> evaluate(std::span<const ScoreTrack> tracks,
                                const data::VideoCollection& videos,
                                std::size_t top_k = 0,
                                double threshold = 0.5);

// "video_id,segment_index,score" rows.
void write_score_tracks(std::span<const ScoreTrack> tracks,
                        const std::filesystem::path& path);
// "metric,category,value" rows.
void write_metrics(std::span<const MetricRow> rows,
                   const std::filesystem::path& path);

}  // namespace vhd::eval

#endif  // VHD_EVAL_EVAL_H_
