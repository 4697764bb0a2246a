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

#ifndef VHD_DATA_SYNTHETIC_H_
#define VHD_DATA_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vhd/data/formats.h"
#include "vhd/data/video.h"

namespace vhd::data {

struct SynthCategory {
  std::string name;
  // Explicit directions; generated orthonormal directions are used when
  // absent. Non-unit vectors are normalized with a warning.
  std::optional<std::vector<double>> prototype;
  std::optional<std::vector<double>> private_direction;
};

// Segment feature = prototype_c + o_v + h * (alpha * shared + beta *
// private_c) + noise * eps, with o_v ~ rho * N(0, I) drawn once per video,
// h ~ U[0, 1] and eps ~ N(0, I) per segment. Label = [h > 0.5], or h itself
// with continuous_labels.
struct SynthSpec {
  std::size_t dim = 32;
  std::vector<SynthCategory> categories = {{"source", {}, {}},
                                           {"target", {}, {}}};
  std::optional<std::vector<double>> shared_direction;
  double alpha = 0.5;
  double beta = 1.0;
  // Length of generated prototypes.
  double prototype_scale = 0.0;
  double rho = 0.2;
  double noise = 0.15;
  std::size_t videos_per_category = 100;
  std::size_t segments_per_video = 40;
  // The last round(test_fraction * videos_per_category) videos of each
  // category form the test split.
  double test_fraction = 0.2;
  bool continuous_labels = false;

  // Orthogonal directions the generator has to place in R^dim.
  std::size_t required_directions() const;
  void validate() const;
};

struct SynthVideo {
  VideoFeatures video;
  Split split = Split::kTrain;
  std::vector<double> latent;  // h per segment
  std::vector<double> offset;  // o_v
};

struct SynthCorpus {
  SynthSpec spec;
  std::vector<SynthVideo> videos;
  std::vector<double> shared_direction;
  std::vector<std::vector<double>> prototypes;
  std::vector<std::vector<double>> private_directions;

  // Videos of one split, optionally restricted to a category.
  InMemoryCollection collection(Split split,
                                std::optional<std::string> category = {}) const;
};

// Bitwise reproducible for a given (spec, seed). DomainError when dim cannot
// hold the required orthogonal directions.
SynthCorpus gen_synthetic_corpus(const SynthSpec& spec, std::uint64_t seed);

// Writes features/<id>.vhdf, annotations/<id>.txt and manifest.tsv under
// `dir`. Train videos of categories in `unlabeled_train_categories` get "-"
// for their annotation and no annotation file.
Manifest write_synthetic_corpus(
    const SynthCorpus& corpus, const std::filesystem::path& dir,
    const std::vector<std::string>& unlabeled_train_categories = {});

}  // namespace vhd::data

#endif  // VHD_DATA_SYNTHETIC_H_
