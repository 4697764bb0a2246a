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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "vhd/binary_io.h"
#include "vhd/data/formats.h"
#include "vhd/data/sampling.h"
#include "vhd/data/synthetic.h"
#include "vhd/error.h"

namespace vhd::data {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("vhd_data_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter_++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

VideoFeatures make_video(std::size_t n, std::size_t d, bool labeled = true,
                         std::string id = "v") {
  VideoFeatures v;
  v.video_id = std::move(id);
  v.category = "c";
  v.num_segments = n;
  v.dim = d;
  v.features.resize(n * d);
  for (std::size_t i = 0; i < n * d; ++i) {
    v.features[i] = static_cast<float>(0.25 * static_cast<double>(i) - 1.5);
  }
  if (labeled) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = i % 3 == 0 ? 1.0 : 0.0;
    v.labels = y;
  }
  return v;
}

FormatError::Kind load_error_kind(const fs::path& path) {
  try {
    load_feature_file(path);
  } catch (const FormatError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for " << path;
  return FormatError::Kind::kIo;
}

TEST(FeatureFileTest, RoundTripIsBitExact) {
  TempDir dir;
  VideoFeatures v = make_video(3, 8);
  v.features[5] = -0.0f;
  v.features[7] = std::numeric_limits<float>::denorm_min();
  v.features[9] = 3.4028235e38f;
  write_feature_file(v, dir.path() / "a.vhdf");
  const VideoFeatures back = load_feature_file(dir.path() / "a.vhdf");
  EXPECT_EQ(back.video_id, "a");
  ASSERT_EQ(back.num_segments, 3u);
  ASSERT_EQ(back.dim, 8u);
  for (std::size_t i = 0; i < v.features.size(); ++i) {
    EXPECT_EQ(std::bit_cast<std::uint32_t>(back.features[i]),
              std::bit_cast<std::uint32_t>(v.features[i]));
  }
  EXPECT_EQ(fs::file_size(dir.path() / "a.vhdf"), 16u + 3 * 8 * 4);
}

TEST(FeatureFileTest, BadMagic) {
  TempDir dir;
  write_feature_file(make_video(2, 2), dir.path() / "a.vhdf");
  std::fstream f(dir.path() / "a.vhdf",
                 std::ios::in | std::ios::out | std::ios::binary);
  f.write("XXXX", 4);
  f.close();
  EXPECT_EQ(load_error_kind(dir.path() / "a.vhdf"),
            FormatError::Kind::kBadMagic);
}

TEST(FeatureFileTest, BadVersion) {
  TempDir dir;
  std::ofstream out(dir.path() / "a.vhdf", std::ios::binary);
  binary::write_magic(out, "VHDF");
  binary::write_u32(out, 2);
  binary::write_u32(out, 1);
  binary::write_u32(out, 1);
  binary::write_f32(out, 1.0f);
  out.close();
  EXPECT_EQ(load_error_kind(dir.path() / "a.vhdf"),
            FormatError::Kind::kBadVersion);
}

TEST(FeatureFileTest, TruncatedPayload) {
  TempDir dir;
  std::ofstream out(dir.path() / "a.vhdf", std::ios::binary);
  binary::write_magic(out, "VHDF");
  binary::write_u32(out, 1);
  binary::write_u32(out, 10);
  binary::write_u32(out, 1);
  for (int i = 0; i < 9; ++i) binary::write_f32(out, 0.5f);
  out.close();
  EXPECT_EQ(load_error_kind(dir.path() / "a.vhdf"),
            FormatError::Kind::kTruncated);
}

TEST(FeatureFileTest, DimensionOverflow) {
  TempDir dir;
  std::ofstream out(dir.path() / "a.vhdf", std::ios::binary);
  binary::write_magic(out, "VHDF");
  binary::write_u32(out, 1);
  binary::write_u32(out, 0xffffffffu);
  binary::write_u32(out, 0xffffffffu);
  out.close();
  EXPECT_EQ(load_error_kind(dir.path() / "a.vhdf"),
            FormatError::Kind::kDimensionOverflow);
}

TEST(FeatureFileTest, MissingFileIsIoError) {
  EXPECT_EQ(load_error_kind("/nonexistent/x.vhdf"), FormatError::Kind::kIo);
}

TEST(AnnotationFileTest, RoundTripAndMalformedLine) {
  TempDir dir;
  const std::vector<double> y = {1.0, 0.0, 0.1, 2.0 / 3.0, -1e-300};
  write_annotation_file(y, dir.path() / "a.txt");
  EXPECT_EQ(load_annotation_file(dir.path() / "a.txt"), y);
  std::ofstream(dir.path() / "b.txt") << "1\nabc\n";
  try {
    load_annotation_file(dir.path() / "b.txt");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.kind(), FormatError::Kind::kMalformed);
  }
}

TEST(ManifestTest, RoundTripAndLoad) {
  TempDir dir;
  const VideoFeatures a = make_video(4, 3, true, "a");
  const VideoFeatures b = make_video(5, 3, false, "b");
  write_feature_file(a, dir.path() / "a.vhdf");
  write_feature_file(b, dir.path() / "b.vhdf");
  write_annotation_file(*a.labels, dir.path() / "a.txt");
  Manifest m;
  m.entries.push_back({Split::kTrain, "src", "a.vhdf", fs::path("a.txt")});
  m.entries.push_back({Split::kTrain, "tgt", "b.vhdf", std::nullopt});
  write_manifest(m, dir.path() / "manifest.tsv");

  const Manifest back = read_manifest(dir.path() / "manifest.tsv");
  ASSERT_EQ(back.entries.size(), 2u);
  EXPECT_FALSE(back.entries[1].annotation_path.has_value());
  EXPECT_EQ(back.categories(), (std::vector<std::string>{"src", "tgt"}));

  const InMemoryCollection all = load_videos(back, Split::kTrain);
  ASSERT_EQ(all.size(), 2u);
  EXPECT_EQ(all.video(0).labels, a.labels);
  EXPECT_FALSE(all.video(1).has_labels());
  EXPECT_EQ(all.video(1).category, "tgt");
  EXPECT_EQ(load_videos(back, Split::kTrain, "src").size(), 1u);
  EXPECT_TRUE(load_videos(back, Split::kTest).empty());
}

TEST(ManifestTest, LabelLengthMismatchIsNamedError) {
  TempDir dir;
  write_feature_file(make_video(4, 3), dir.path() / "a.vhdf");
  write_annotation_file(std::vector<double>{1, 0, 1}, dir.path() / "a.txt");
  std::ofstream(dir.path() / "m.tsv") << "test\tsrc\ta.vhdf\ta.txt\n";
  try {
    load_videos(read_manifest(dir.path() / "m.tsv"), Split::kTest);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.kind(), FormatError::Kind::kShapeMismatch);
  }
}

TEST(ManifestTest, RejectsWrongFieldCountAndSplit) {
  TempDir dir;
  std::ofstream(dir.path() / "m1.tsv") << "train\tsrc\ta.vhdf\n";
  std::ofstream(dir.path() / "m2.tsv") << "dev\tsrc\ta.vhdf\t-\n";
  EXPECT_THROW(read_manifest(dir.path() / "m1.tsv"), FormatError);
  EXPECT_THROW(read_manifest(dir.path() / "m2.tsv"), FormatError);
}

std::vector<std::size_t> indices_of(const SegmentSet& s) {
  std::vector<std::size_t> out;
  for (const auto& m : s.members) out.push_back(m.segment_index);
  return out;
}

TEST(SampleTrainingSetTest, DistinctIndicesWhenVideoIsLongEnough) {
  const VideoFeatures v = make_video(30, 4);
  Rng rng(1);
  const SegmentSet s = sample_training_set(v, 20, rng);
  ASSERT_EQ(s.size(), 20u);
  const auto idx = indices_of(s);
  EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), 20u);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(s.members[i].video_id, "v");
    EXPECT_EQ(*s.members[i].label, (*v.labels)[idx[i]]);
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_EQ(s.features.at(i, j), v.row(idx[i])[j]);
    }
  }
  EXPECT_EQ(s.kind, SetKind::kSource);
}

TEST(SampleTrainingSetTest, ShortVideoDuplicates) {
  const VideoFeatures v = make_video(3, 2);
  Rng rng(2);
  const auto idx = indices_of(sample_training_set(v, 4, rng));
  ASSERT_EQ(idx.size(), 4u);
  std::map<std::size_t, int> counts;
  for (std::size_t i : idx) ++counts[i];
  EXPECT_EQ(counts.size(), 3u);
  int dupes = 0;
  for (const auto& [i, c] : counts) dupes += c - 1;
  EXPECT_EQ(dupes, 1);
}

TEST(SampleTrainingSetTest, DeterministicGivenSeed) {
  const VideoFeatures v = make_video(50, 2);
  Rng a(7), b(7), c(8);
  EXPECT_EQ(indices_of(sample_training_set(v, 20, a)),
            indices_of(sample_training_set(v, 20, b)));
  Rng a2(7);
  EXPECT_NE(indices_of(sample_training_set(v, 20, a2)),
            indices_of(sample_training_set(v, 20, c)));
}

TEST(SampleTrainingSetTest, Errors) {
  Rng rng(3);
  EXPECT_THROW(sample_training_set(make_video(5, 2, false), 4, rng),
               DomainError);
  EXPECT_THROW(sample_training_set(make_video(5, 2), 1, rng), DomainError);
  const SegmentSet t = sample_target_set(make_video(5, 2, false), 4, rng);
  EXPECT_EQ(t.kind, SetKind::kTarget);
  EXPECT_THROW(t.labels(), DomainError);
}

TEST(SampleTrainingSetTest, UniformCoverage) {
  // Each of 40 segments should be drawn with probability 20/40.
  const VideoFeatures v = make_video(40, 1);
  Rng rng(4);
  std::vector<int> hits(40, 0);
  const int trials = 4000;
  for (int t = 0; t < trials; ++t) {
    for (std::size_t i : indices_of(sample_training_set(v, 20, rng))) ++hits[i];
  }
  for (int h : hits) {
    // Binomial(4000, 0.5) has sd ~31.6; 5 sd bound.
    EXPECT_NEAR(h, 2000, 160);
  }
}

TEST(MixedSetTest, HalfFromEachWithCategoryLabels) {
  const VideoFeatures s = make_video(30, 3, true, "s");
  const VideoFeatures t = make_video(30, 3, false, "t");
  Rng rng(5);
  const SegmentSet xs = sample_training_set(s, 4, rng);
  const SegmentSet xt = sample_target_set(t, 4, rng);
  const SegmentSet xm = build_mixed_set(xs, xt, rng);
  ASSERT_EQ(xm.size(), 4u);
  EXPECT_EQ(xm.kind, SetKind::kMixed);
  const auto y = xm.labels();
  EXPECT_EQ(std::count(y.values().begin(), y.values().end(), 1.0), 2);
  EXPECT_EQ(std::count(y.values().begin(), y.values().end(), 0.0), 2);
  for (std::size_t i = 0; i < 4; ++i) {
    const SetMember& m = xm.members[i];
    const SegmentSet& origin = *m.label == 1.0 ? xt : xs;
    EXPECT_EQ(m.video_id, *m.label == 1.0 ? "t" : "s");
    EXPECT_NE(std::find(indices_of(origin).begin(), indices_of(origin).end(),
                        m.segment_index),
              indices_of(origin).end());
    const VideoFeatures& video = *m.label == 1.0 ? t : s;
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_EQ(xm.features.at(i, j), video.row(m.segment_index)[j]);
    }
  }
}

TEST(MixedSetTest, AlwaysTwoVideosAndSeedsDiffer) {
  const VideoFeatures s = make_video(30, 2, true, "s");
  const VideoFeatures t = make_video(30, 2, false, "t");
  Rng base(6);
  const SegmentSet xs = sample_training_set(s, 20, base);
  const SegmentSet xt = sample_target_set(t, 20, base);
  int differences = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng r1(seed), r2(seed + 1000);
    const SegmentSet a = build_mixed_set(xs, xt, r1);
    const SegmentSet b = build_mixed_set(xs, xt, r2);
    std::set<std::string> ids;
    for (const auto& m : a.members) ids.insert(m.video_id);
    EXPECT_EQ(ids.size(), 2u);
    auto key = [](const SegmentSet& x) {
      std::multiset<std::pair<std::string, std::size_t>> k;
      for (const auto& m : x.members) k.insert({m.video_id, m.segment_index});
      return k;
    };
    if (key(a) != key(b)) ++differences;
  }
  EXPECT_GE(differences, 1);
}

TEST(MixedSetTest, OddSizeIsDomainError) {
  const VideoFeatures s = make_video(10, 2);
  Rng rng(7);
  const SegmentSet xs = sample_training_set(s, 3, rng);
  const SegmentSet xt = sample_target_set(s, 3, rng);
  EXPECT_THROW(build_mixed_set(xs, xt, rng), DomainError);
}

double dot(std::span<const float> a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

TEST(SyntheticTest, NoiselessProjectionOrdersByLatent) {
  SynthSpec spec;
  spec.noise = 0.0;
  spec.rho = 0.0;
  spec.alpha = 1.0;
  spec.beta = 0.0;
  spec.videos_per_category = 3;
  const SynthCorpus c = gen_synthetic_corpus(spec, 11);
  for (const auto& sv : c.videos) {
    for (std::size_t i = 0; i < sv.latent.size(); ++i) {
      for (std::size_t j = 0; j < sv.latent.size(); ++j) {
        if (sv.latent[i] > sv.latent[j] + 1e-6) {
          EXPECT_GT(dot(sv.video.row(i), c.shared_direction),
                    dot(sv.video.row(j), c.shared_direction));
        }
      }
    }
  }
}

TEST(SyntheticTest, LabelBalance) {
  SynthSpec spec;
  spec.categories = {{"a", {}, {}}};
  spec.videos_per_category = 250;
  spec.segments_per_video = 40;
  const SynthCorpus c = gen_synthetic_corpus(spec, 12);
  double positives = 0.0, total = 0.0;
  for (const auto& sv : c.videos) {
    for (double y : *sv.video.labels) {
      positives += y;
      total += 1.0;
    }
  }
  EXPECT_EQ(total, 10000.0);
  EXPECT_GE(positives / total, 0.47);
  EXPECT_LE(positives / total, 0.53);
}

TEST(SyntheticTest, DirectionsAreOrthonormal) {
  SynthSpec spec;
  spec.prototype_scale = 2.0;
  const SynthCorpus c = gen_synthetic_corpus(spec, 13);
  std::vector<std::vector<double>> dirs = {c.shared_direction};
  for (const auto& p : c.private_directions) dirs.push_back(p);
  for (auto p : c.prototypes) {
    for (double& x : p) x /= 2.0;
    dirs.push_back(p);
  }
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    for (std::size_t j = 0; j < dirs.size(); ++j) {
      const double d = std::inner_product(dirs[i].begin(), dirs[i].end(),
                                          dirs[j].begin(), 0.0);
      EXPECT_NEAR(d, i == j ? 1.0 : 0.0, 1e-12);
    }
  }
}

TEST(SyntheticTest, ReproducibleBitwise) {
  SynthSpec spec;
  spec.videos_per_category = 5;
  const SynthCorpus a = gen_synthetic_corpus(spec, 14);
  const SynthCorpus b = gen_synthetic_corpus(spec, 14);
  const SynthCorpus c = gen_synthetic_corpus(spec, 15);
  ASSERT_EQ(a.videos.size(), b.videos.size());
  for (std::size_t i = 0; i < a.videos.size(); ++i) {
    EXPECT_EQ(a.videos[i].video.features, b.videos[i].video.features);
    EXPECT_EQ(a.videos[i].video.labels, b.videos[i].video.labels);
  }
  EXPECT_NE(a.videos[0].video.features, c.videos[0].video.features);
}

TEST(SyntheticTest, SplitsAndNames) {
  SynthSpec spec;
  spec.videos_per_category = 10;
  spec.test_fraction = 0.2;
  const SynthCorpus c = gen_synthetic_corpus(spec, 16);
  EXPECT_EQ(c.collection(Split::kTrain).size(), 16u);
  EXPECT_EQ(c.collection(Split::kTest, "target").size(), 2u);
  EXPECT_EQ(c.videos[9].video.video_id, "source_0009");
  EXPECT_EQ(c.videos[9].split, Split::kTest);
}

TEST(SyntheticTest, DimTooSmall) {
  SynthSpec spec;
  spec.dim = 4;  // two categories need five directions
  EXPECT_THROW(gen_synthetic_corpus(spec, 1), DomainError);
  spec.categories = {{"only", {}, {}}};
  spec.dim = 3;
  EXPECT_NO_THROW(gen_synthetic_corpus(spec, 1));
  spec.dim = 2;
  EXPECT_THROW(gen_synthetic_corpus(spec, 1), DomainError);
}

TEST(SyntheticTest, ExplicitDirectionsAreNormalized) {
  SynthSpec spec;
  spec.dim = 6;
  spec.categories = {{"a", std::vector<double>{0, 0, 0, 0, 0, 3},
                      std::vector<double>{0, 2, 0, 0, 0, 0}}};
  spec.shared_direction = std::vector<double>{5, 0, 0, 0, 0, 0};
  spec.prototype_scale = 1.0;
  const SynthCorpus c = gen_synthetic_corpus(spec, 2);
  EXPECT_EQ(c.shared_direction, (std::vector<double>{1, 0, 0, 0, 0, 0}));
  EXPECT_EQ(c.private_directions[0], (std::vector<double>{0, 1, 0, 0, 0, 0}));
  EXPECT_EQ(c.prototypes[0], (std::vector<double>{0, 0, 0, 0, 0, 1}));
  spec.shared_direction = std::vector<double>(6, 0.0);
  EXPECT_THROW(gen_synthetic_corpus(spec, 2), DomainError);
}

// Pooled linear regression of h on raw features versus ranking by the
// within-video centered projection onto the true highlight direction.
double pooled_ap(const std::vector<double>& scores,
                 const std::vector<double>& labels) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  double hits = 0.0, sum = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (labels[order[k]] == 1.0) {
      hits += 1.0;
      sum += hits / static_cast<double>(k + 1);
    }
  }
  return sum / hits;
}

TEST(SyntheticTest, OffsetDefeatsPointwiseProbeButNotCentering) {
  SynthSpec spec;
  spec.categories = {{"a", {}, {}}};
  spec.rho = 4.0;
  spec.noise = 0.05;
  spec.alpha = 1.0;
  spec.beta = 1.0;
  spec.videos_per_category = 200;
  const SynthCorpus c = gen_synthetic_corpus(spec, 17);
  const std::size_t d = spec.dim;

  // Least squares h ~ w.x + b over all segments of the first half of the
  // videos, evaluated on the second half.
  const std::size_t fit_videos = c.videos.size() / 2;
  std::vector<double> ata((d + 1) * (d + 1), 0.0), atb(d + 1, 0.0);
  for (std::size_t v = 0; v < fit_videos; ++v) {
    const auto& sv = c.videos[v];
    for (std::size_t s = 0; s < sv.latent.size(); ++s) {
      std::vector<double> x(sv.video.row(s).begin(), sv.video.row(s).end());
      x.push_back(1.0);
      for (std::size_t i = 0; i <= d; ++i) {
        atb[i] += x[i] * sv.latent[s];
        for (std::size_t j = 0; j <= d; ++j) ata[i * (d + 1) + j] += x[i] * x[j];
      }
    }
  }
  // Gaussian elimination with partial pivoting.
  const std::size_t n = d + 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(ata[r * n + col]) > std::abs(ata[pivot * n + col])) pivot = r;
    }
    for (std::size_t k = 0; k < n; ++k) std::swap(ata[col * n + k], ata[pivot * n + k]);
    std::swap(atb[col], atb[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = ata[r * n + col] / ata[col * n + col];
      for (std::size_t k = col; k < n; ++k) ata[r * n + k] -= f * ata[col * n + k];
      atb[r] -= f * atb[col];
    }
  }
  std::vector<double> w(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = atb[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= ata[r * n + k] * w[k];
    w[r] = s / ata[r * n + r];
  }

  std::vector<double> highlight(d);
  for (std::size_t i = 0; i < d; ++i) {
    highlight[i] = c.shared_direction[i] + c.private_directions[0][i];
  }
  std::vector<double> probe, centered, labels;
  for (std::size_t v = fit_videos; v < c.videos.size(); ++v) {
    const auto& sv = c.videos[v];
    std::vector<double> proj;
    for (std::size_t s = 0; s < sv.latent.size(); ++s) {
      double p = w[d];
      for (std::size_t i = 0; i < d; ++i) p += w[i] * sv.video.row(s)[i];
      probe.push_back(p);
      proj.push_back(dot(sv.video.row(s), highlight));
      labels.push_back((*sv.video.labels)[s]);
    }
    const double mean =
        std::accumulate(proj.begin(), proj.end(), 0.0) / proj.size();
    for (double p : proj) centered.push_back(p - mean);
  }
  EXPECT_LE(pooled_ap(probe, labels), 0.75);
  EXPECT_GE(pooled_ap(centered, labels), 0.95);
}

}  // namespace
}  // namespace vhd::data
