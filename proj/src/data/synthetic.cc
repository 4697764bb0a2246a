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

#include "vhd/data/synthetic.h"

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "vhd/error.h"
#include "vhd/rng.h"

namespace vhd::data {
namespace {

std::vector<double> unit(std::vector<double> v, std::size_t dim,
                         const std::string& what) {
  if (v.size() != dim) {
    throw DimensionError(what + " has length " + std::to_string(v.size()) +
                         ", expected " + std::to_string(dim));
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw DomainError(what + " must be a finite non-zero vector");
  }
  if (std::abs(norm - 1.0) > 1e-9) {
    spdlog::warn("{} has norm {}; normalizing", what, norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

// Orthonormal columns of the thin Q factor of a Gaussian dim x k matrix.
std::vector<std::vector<double>> random_orthonormal(std::size_t dim,
                                                    std::size_t k, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(dim, k);
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = normal(rng);
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(dim, k);
  std::vector<std::vector<double>> out(k, std::vector<double>(dim));
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < dim; ++i) out[j][i] = q(i, j);
  }
  return out;
}

std::string video_name(const std::string& category, std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04zu", index);
  return category + "_" + buf;
}

}  // namespace

std::size_t SynthSpec::required_directions() const {
  return 1 + 2 * categories.size();
}

void SynthSpec::validate() const {
  if (dim == 0) throw DomainError("synthetic dim must be positive");
  if (categories.empty()) throw DomainError("no synthetic categories");
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i].name.empty()) {
      throw DomainError("synthetic category names must be non-empty");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (categories[i].name == categories[j].name) {
        throw DomainError("duplicate category name " + categories[i].name);
      }
    }
  }
  if (required_directions() > dim) {
    throw DomainError("dim " + std::to_string(dim) + " cannot hold " +
                      std::to_string(required_directions()) +
                      " orthogonal directions (shared plus a private "
                      "direction and a prototype per category)");
  }
  if (videos_per_category == 0 || segments_per_video == 0) {
    throw DomainError("synthetic corpus needs videos and segments");
  }
  for (double v : {alpha, beta, prototype_scale, rho, noise}) {
    if (!std::isfinite(v) || v < 0.0) {
      throw DomainError("synthetic scales must be finite and non-negative");
    }
  }
  if (!(test_fraction >= 0.0 && test_fraction <= 1.0)) {
    throw DomainError("test_fraction must lie in [0, 1]");
  }
}

InMemoryCollection SynthCorpus::collection(
    Split split, std::optional<std::string> category) const {
  InMemoryCollection out;
  for (const auto& v : videos) {
    if (v.split != split) continue;
    if (category && v.video.category != *category) continue;
    out.add(v.video);
  }
  return out;
}

SynthCorpus gen_synthetic_corpus(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t d = spec.dim;
  const std::size_t c = spec.categories.size();

  SynthCorpus corpus;
  corpus.spec = spec;
  Rng direction_rng = make_rng(seed, "synth.directions");
  const auto basis =
      random_orthonormal(d, spec.required_directions(), direction_rng);
  corpus.shared_direction =
      spec.shared_direction
          ? unit(*spec.shared_direction, d, "shared direction")
          : basis[0];
  for (std::size_t k = 0; k < c; ++k) {
    const SynthCategory& cat = spec.categories[k];
    corpus.private_directions.push_back(
        cat.private_direction
            ? unit(*cat.private_direction, d,
                   "private direction of " + cat.name)
            : basis[1 + k]);
    std::vector<double> proto =
        cat.prototype ? unit(*cat.prototype, d, "prototype of " + cat.name)
                      : basis[1 + c + k];
    for (double& x : proto) x *= spec.prototype_scale;
    corpus.prototypes.push_back(std::move(proto));
  }

  const auto test_count = static_cast<std::size_t>(
      std::lround(spec.test_fraction * static_cast<double>(spec.videos_per_category)));
  Rng rng = make_rng(seed, "synth.videos");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (std::size_t k = 0; k < c; ++k) {
    std::vector<double> highlight(d);
    for (std::size_t i = 0; i < d; ++i) {
      highlight[i] = spec.alpha * corpus.shared_direction[i] +
                     spec.beta * corpus.private_directions[k][i];
    }
    for (std::size_t v = 0; v < spec.videos_per_category; ++v) {
      SynthVideo sv;
      sv.split = v + test_count >= spec.videos_per_category ? Split::kTest
                                                            : Split::kTrain;
      VideoFeatures& vf = sv.video;
      vf.video_id = video_name(spec.categories[k].name, v);
      vf.category = spec.categories[k].name;
      vf.num_segments = spec.segments_per_video;
      vf.dim = d;
      vf.features.resize(vf.num_segments * d);
      sv.offset.resize(d);
      for (double& o : sv.offset) o = spec.rho * normal(rng);
      std::vector<double> labels(vf.num_segments);
      sv.latent.resize(vf.num_segments);
      for (std::size_t s = 0; s < vf.num_segments; ++s) {
        const double h = uniform(rng);
        sv.latent[s] = h;
        labels[s] = spec.continuous_labels ? h : (h > 0.5 ? 1.0 : 0.0);
        for (std::size_t i = 0; i < d; ++i) {
          const double x = corpus.prototypes[k][i] + sv.offset[i] +
                           h * highlight[i] + spec.noise * normal(rng);
          vf.features[s * d + i] = static_cast<float>(x);
        }
      }
      vf.labels = std::move(labels);
      corpus.videos.push_back(std::move(sv));
    }
  }
  return corpus;
}

Manifest write_synthetic_corpus(
    const SynthCorpus& corpus, const std::filesystem::path& dir,
    const std::vector<std::string>& unlabeled_train_categories) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "features");
  fs::create_directories(dir / "annotations");
  Manifest manifest;
  manifest.base_dir = dir;
  for (const auto& sv : corpus.videos) {
    const VideoFeatures& v = sv.video;
    ManifestEntry e;
    e.split = sv.split;
    e.category = v.category;
    e.feature_path = fs::path("features") / (v.video_id + ".vhdf");
    write_feature_file(v, dir / e.feature_path);
    const bool hide =
        sv.split == Split::kTrain &&
        std::find(unlabeled_train_categories.begin(),
                  unlabeled_train_categories.end(),
                  v.category) != unlabeled_train_categories.end();
    if (!hide) {
      e.annotation_path = fs::path("annotations") / (v.video_id + ".txt");
      write_annotation_file(*v.labels, dir / *e.annotation_path);
    }
    manifest.entries.push_back(std::move(e));
  }
  write_manifest(manifest, dir / "manifest.tsv");
  return manifest;
}

}  // namespace vhd::data
