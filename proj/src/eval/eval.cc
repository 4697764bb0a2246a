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

#include "vhd/eval/eval.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>

#include "vhd/diffcore/ops.h"
#include "vhd/diffcore/tape.h"
#include "vhd/error.h"
#include "vhd/model/forward.h"

namespace vhd::eval {
namespace {

using diff::Tensor;

std::vector<std::size_t> ranking(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  return order;
}

void check_binary(std::span<const double> scores,
                  std::span<const double> labels) {
  if (scores.size() != labels.size()) {
    throw DimensionError("scores and labels differ in length: " +
                         std::to_string(scores.size()) + " vs " +
                         std::to_string(labels.size()));
  }
  for (double y : labels) {
    if (y != 0.0 && y != 1.0) {
      throw DomainError("average precision needs 0/1 labels");
    }
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw FormatError(FormatError::Kind::kIo,
                      "cannot open " + path.string() + " for writing");
  }
  out << std::setprecision(17);
  return out;
}

template <typename PerVideo>
double mean_over_evaluable(std::span<const ScoreTrack> tracks,
                           std::span<const std::vector<double>> annotations,
                           double threshold, PerVideo per_video) {
  if (tracks.size() != annotations.size()) {
    throw DimensionError("every score track needs an annotation");
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const std::vector<double> y = binarize(annotations[i], threshold);
    if (std::find(y.begin(), y.end(), 1.0) == y.end()) {
      spdlog::warn("video {} has no positive segments; excluded from mAP",
                   tracks[i].video_id);
      continue;
    }
    sum += per_video(tracks[i].scores, y);
    ++count;
  }
  if (count == 0) throw DomainError("no video with a positive segment");
  return sum / static_cast<double>(count);
}

}  // namespace

InferenceWindow build_window(std::size_t num_segments, std::size_t s,
                             std::size_t n) {
  if (n == 0) throw DomainError("window size must be at least 1");
  if (s >= num_segments) {
    throw DomainError("segment " + std::to_string(s) + " outside video of " +
                      std::to_string(num_segments) + " segments");
  }
  const std::size_t before = (n - 1) / 2;
  const std::size_t after = n - 1 - before;
  const std::size_t last = num_segments - 1;
  InferenceWindow w;
  w.members.reserve(n);
  if (num_segments >= n) {
    std::size_t lo = s >= before ? s - before : 0;
    if (lo + n - 1 > last) lo = last + 1 - n;
    for (std::size_t i = 0; i < n; ++i) w.members.push_back(lo + i);
    w.center_pos = s - lo;
    return w;
  }
  const std::size_t short_before = before > s ? before - s : 0;
  const std::size_t short_after = after > last - s ? after - (last - s) : 0;
  const std::size_t missing = n - num_segments;
  std::size_t front = 0;
  std::size_t back = 0;
  if (short_before > 0 && short_after > 0) {
    front = short_before;
    back = short_after;
  } else if (short_before > 0) {
    back = missing;
  } else {
    front = missing;
  }
  w.members.assign(front, 0);
  for (std::size_t i = 0; i < num_segments; ++i) w.members.push_back(i);
  w.members.insert(w.members.end(), back, last);
  w.center_pos = front + s;
  return w;
}

std::string_view score_mode_name(ScoreMode mode) {
  switch (mode) {
    case ScoreMode::kSl:
      return "sl";
    case ScoreMode::kCoarse:
      return "coarse";
    case ScoreMode::kFine:
      return "fine";
    case ScoreMode::kAveraged:
      return "averaged";
  }
  return "?";
}

ScoreMode parse_score_mode(std::string_view text) {
  for (ScoreMode m : {ScoreMode::kSl, ScoreMode::kCoarse, ScoreMode::kFine,
                      ScoreMode::kAveraged}) {
    if (text == score_mode_name(m)) return m;
  }
  throw ConfigError("unknown score mode '" + std::string(text) + "'");
}

ScoreTrack score_video(const model::ModelParams& params,
                       const data::VideoFeatures& video, std::size_t set_size,
                       ScoreMode mode) {
  using model::HeadRole;
  std::vector<HeadRole> roles;
  switch (mode) {
    case ScoreMode::kSl:
      roles = {HeadRole::kMain};
      break;
    case ScoreMode::kCoarse:
      roles = {HeadRole::kCoarse};
      break;
    case ScoreMode::kFine:
      roles = {HeadRole::kFine};
      break;
    case ScoreMode::kAveraged:
      roles = {HeadRole::kCoarse, HeadRole::kFine};
      break;
  }
  for (HeadRole r : roles) {
    if (!params.has_head(r)) {
      throw ConfigError("score mode " + std::string(score_mode_name(mode)) +
                        " needs a " + std::string(model::head_role_name(r)) +
                        " head, which the model does not have");
    }
  }
  if (video.dim != params.config.feature_dim()) {
    throw DimensionError("video " + video.video_id + " has feature dim " +
                         std::to_string(video.dim) + ", model expects " +
                         std::to_string(params.config.feature_dim()));
  }

  diff::NoGradScope no_grad;
  ScoreTrack track{video.video_id, video.category, {}, mode};
  track.scores.reserve(video.num_segments);
  for (std::size_t s = 0; s < video.num_segments; ++s) {
    const InferenceWindow w = build_window(video.num_segments, s, set_size);
    const Tensor z = model::encode_set(params, video.gather(w.members));
    const Tensor row = diff::slice(z, 0, w.center_pos, 1);
    double score = 0.0;
    for (HeadRole r : roles) {
      score += model::score_segments(params.head(r), row).at(0);
    }
    track.scores.push_back(score / static_cast<double>(roles.size()));
  }
  return track;
}

std::vector<ScoreTrack> score_collection(const model::ModelParams& params,
                                         const data::VideoCollection& videos,
                                         std::size_t set_size,
                                         ScoreMode mode) {
  std::vector<ScoreTrack> out;
  out.reserve(videos.size());
  for (std::size_t i = 0; i < videos.size(); ++i) {
    out.push_back(score_video(params, videos.video(i), set_size, mode));
  }
  return out;
}

double average_precision(std::span<const double> scores,
                         std::span<const double> labels) {
  check_binary(scores, labels);
  const double positives = std::accumulate(labels.begin(), labels.end(), 0.0);
  if (positives == 0.0) throw DomainError("average precision without positives");
  return truncated_average_precision(scores, labels, scores.size());
}

double truncated_average_precision(std::span<const double> scores,
                                   std::span<const double> labels,
                                   std::size_t k) {
  check_binary(scores, labels);
  if (k == 0) throw DomainError("k must be at least 1");
  const auto order = ranking(scores);
  const std::size_t limit = std::min(k, order.size());
  double hits = 0.0;
  double sum = 0.0;
  for (std::size_t rank = 0; rank < limit; ++rank) {
    if (labels[order[rank]] == 1.0) {
      hits += 1.0;
      sum += hits / static_cast<double>(rank + 1);
    }
  }
  return hits == 0.0 ? 0.0 : sum / hits;
}

std::vector<double> binarize(std::span<const double> labels, double threshold) {
  std::vector<double> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out[i] = labels[i] >= threshold ? 1.0 : 0.0;
  }
  return out;
}

double mean_ap(std::span<const ScoreTrack> tracks,
               std::span<const std::vector<double>> annotations,
               double threshold) {
  return mean_over_evaluable(
      tracks, annotations, threshold,
      [](const std::vector<double>& s, const std::vector<double>& y) {
        return average_precision(s, y);
      });
}

double top_k_map(std::span<const ScoreTrack> tracks,
                 std::span<const std::vector<double>> annotations,
                 std::size_t k, double threshold) {
  if (k == 0) throw DomainError("k must be at least 1");
  return mean_over_evaluable(
      tracks, annotations, threshold,
      [k](const std::vector<double>& s, const std::vector<double>& y) {
        return truncated_average_precision(s, y, k);
      });
}

std::vector<MetricRow> evaluate(std::span<const ScoreTrack> tracks,
                                const data::VideoCollection& videos,
                                std::size_t top_k, double threshold) {
  if (tracks.size() != videos.size()) {
    throw DimensionError("one score track per video expected");
  }
  std::map<std::string, std::pair<std::vector<ScoreTrack>,
                                  std::vector<std::vector<double>>>>
      by_category;
  std::vector<std::string> order;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const auto& v = videos.video(i);
    if (!v.has_labels()) {
      throw DomainError("video " + v.video_id + " has no annotation");
    }
    if (!by_category.contains(v.category)) order.push_back(v.category);
    auto& [t, a] = by_category[v.category];
    t.push_back(tracks[i]);
    a.push_back(*v.labels);
  }
  std::vector<MetricRow> rows;
  for (const auto& category : order) {
    const auto& [t, a] = by_category[category];
    rows.push_back({"map", category, mean_ap(t, a, threshold)});
    if (top_k > 0) {
      rows.push_back({"top" + std::to_string(top_k) + "_map", category,
                      top_k_map(t, a, top_k, threshold)});
    }
  }
  return rows;
}

void write_score_tracks(std::span<const ScoreTrack> tracks,
                        const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << "video_id,segment_index,score\n";
  for (const auto& t : tracks) {
    for (std::size_t i = 0; i < t.scores.size(); ++i) {
      out << t.video_id << ',' << i << ',' << t.scores[i] << '\n';
    }
  }
}

void write_metrics(std::span<const MetricRow> rows,
                   const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << "metric,category,value\n";
  for (const auto& r : rows) {
    out << r.metric << ',' << r.category << ',' << r.value << '\n';
  }
}

}  // namespace vhd::eval
