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
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "vhd/diffcore/grad_check.h"
#include "vhd/diffcore/ops.h"
#include "vhd/error.h"
#include "vhd/model/checkpoint.h"
#include "vhd/model/forward.h"
#include "vhd/model/params.h"

namespace vhd::model {
namespace {

EncoderConfig small_config(std::size_t d = 8, std::size_t layers = 2,
                           std::size_t heads = 2) {
  EncoderConfig c;
  c.model_dim = d;
  c.num_layers = layers;
  c.num_heads = heads;
  return c;
}

Tensor random_set(std::size_t n, std::size_t d, std::uint64_t seed,
                  double spread = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, spread);
  std::vector<double> v(n * d);
  for (double& x : v) x = dist(rng);
  return Tensor::from_vector({n, d}, std::move(v));
}

Tensor permute_rows(const Tensor& x, const std::vector<std::size_t>& perm) {
  return diff::gather_rows(x, perm);
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() /
         ("vhd_model_test_" + std::to_string(::getpid()) + "_" + name);
}

TEST(ConfigTest, RejectsIndivisibleHeads) {
  EncoderConfig c = small_config(10, 1, 4);
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(init_params(c, 1, 0), ConfigError);
}

TEST(ConfigTest, ReferenceDefaults) {
  const EncoderConfig c;
  EXPECT_EQ(c.num_layers, 5u);
  EXPECT_EQ(c.num_heads, 8u);
  EXPECT_EQ(c.model_dim, 4096u);
  EXPECT_EQ(c.resolved_ffn_dim(), 4u * 4096u);
  EXPECT_NO_THROW(c.validate());
}

TEST(InitTest, SameSeedIsBitwiseIdentical) {
  const auto a = init_params(small_config(), 2, 42).named_parameters();
  const auto b = init_params(small_config(), 2, 42).named_parameters();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, b[i].name);
    EXPECT_TRUE(std::equal(a[i].tensor.values().begin(),
                           a[i].tensor.values().end(),
                           b[i].tensor.values().begin()));
  }
}

TEST(InitTest, DifferentSeedsDiffer) {
  const auto a = init_params(small_config(), 1, 1).parameters();
  const auto b = init_params(small_config(), 1, 2).parameters();
  bool any_difference = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    any_difference |= !std::equal(a[i].values().begin(), a[i].values().end(),
                                  b[i].values().begin());
  }
  EXPECT_TRUE(any_difference);
}

TEST(InitTest, LayerNormGainsAreOnesAndBiasesZero) {
  for (const auto& nt : init_params(small_config(), 2, 9).named_parameters()) {
    const bool gain = nt.name.ends_with(".gain");
    const bool bias = nt.name.ends_with(".bias") || nt.name.ends_with(".b1") ||
                      nt.name.ends_with(".b2");
    for (double v : nt.tensor.values()) {
      if (gain) {
        EXPECT_EQ(v, 1.0) << nt.name;
      }
      if (bias) {
        EXPECT_EQ(v, 0.0) << nt.name;
      }
      EXPECT_EQ(v, static_cast<double>(static_cast<float>(v))) << nt.name;
    }
  }
}

TEST(InitTest, HeadShapesFollowFixedWidths) {
  const ModelParams p = init_params(small_config(), 2, 3);
  ASSERT_TRUE(p.has_head(HeadRole::kCoarse));
  ASSERT_TRUE(p.has_head(HeadRole::kFine));
  EXPECT_FALSE(p.has_head(HeadRole::kMain));
  const HeadParams& h = p.head(HeadRole::kFine);
  EXPECT_EQ(h.fc1_weight.shape(), (diff::Shape{8, kHeadHidden1}));
  EXPECT_EQ(h.fc2_weight.shape(), (diff::Shape{kHeadHidden1, kHeadHidden2}));
  EXPECT_EQ(h.fc3_weight.shape(), (diff::Shape{kHeadHidden2, 1}));
  EXPECT_THROW(p.head(HeadRole::kMain), ConfigError);
}

TEST(EncoderTest, PermutationEquivariance) {
  const ModelParams p = init_params(small_config(32, 2, 4), 1, 5);
  const Tensor z = random_set(20, 32, 6);
  const Tensor scores = score_segments(p.head(HeadRole::kMain), encode_set(p, z));
  std::vector<std::size_t> perm(20);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(perm.begin(), perm.end(), rng);
    const Tensor permuted = score_segments(
        p.head(HeadRole::kMain), encode_set(p, permute_rows(z, perm)));
    for (std::size_t i = 0; i < perm.size(); ++i) {
      EXPECT_NEAR(permuted.at(i), scores.at(perm[i]), 1e-5);
    }
  }
}

TEST(EncoderTest, SingletonSet) {
  const ModelParams p = init_params(small_config(), 1, 5);
  const Tensor out = encode_set(p, random_set(1, 8, 2));
  EXPECT_EQ(out.shape(), (diff::Shape{1, 8}));
}

TEST(EncoderTest, UntrainedEncoderChangesInput) {
  EncoderConfig c = small_config(16, 2, 2);
  c.use_final_norm = false;
  const ModelParams p = init_params(c, 1, 8);
  const Tensor z = random_set(6, 16, 9);
  const Tensor out = encode_set(p, z);
  double max_diff = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(out.values()[i] - z.values()[i]));
  }
  EXPECT_GT(max_diff, 1e-3);
}

TEST(EncoderTest, ZeroOutputProjectionsGiveIdentity) {
  EncoderConfig c = small_config(8, 3, 2);
  c.use_final_norm = false;
  ModelParams p = init_params(c, 1, 10);
  for (LayerParams& l : p.encoder->layers) {
    for (double& v : l.output.mutable_values()) v = 0.0;
    for (double& v : l.ffn_w2.mutable_values()) v = 0.0;
  }
  const Tensor z = random_set(5, 8, 11);
  const Tensor out = encode_set(p, z);
  for (std::size_t i = 0; i < z.size(); ++i) {
    EXPECT_EQ(out.values()[i], z.values()[i]);
  }
}

TEST(EncoderTest, AttentionRowsAreDistributions) {
  const ModelParams p = init_params(small_config(16, 3, 4), 1, 12);
  std::vector<Tensor> maps;
  ForwardOptions options;
  options.attention = &maps;
  encode_set(p, random_set(7, 16, 13, 3.0), options);
  ASSERT_EQ(maps.size(), 12u);
  for (const Tensor& a : maps) {
    ASSERT_EQ(a.shape(), (diff::Shape{7, 7}));
    for (std::size_t r = 0; r < 7; ++r) {
      double total = 0.0;
      for (std::size_t c = 0; c < 7; ++c) total += a.at(r, c);
      EXPECT_NEAR(total, 1.0, 1e-6);
    }
  }
}

TEST(EncoderTest, InputProjection) {
  EncoderConfig c = small_config(8, 1, 2);
  c.input_dim = 12;
  const ModelParams p = init_params(c, 1, 14);
  EXPECT_EQ(encode_set(p, random_set(4, 12, 15)).shape(), (diff::Shape{4, 8}));
  EXPECT_THROW(encode_set(p, random_set(4, 8, 15)), DimensionError);
}

TEST(EncoderTest, WrongWidthIsDimensionError) {
  const ModelParams p = init_params(small_config(), 1, 5);
  EXPECT_THROW(encode_set(p, random_set(3, 9, 1)), DimensionError);
  EXPECT_THROW(score_segments(p.head(HeadRole::kMain), random_set(3, 9, 1)),
               DimensionError);
}

TEST(EncoderTest, WithoutEncoderIsIdentity) {
  const HeadRole roles[] = {HeadRole::kMain};
  const ModelParams p = init_params(small_config(), roles, 3, false);
  EXPECT_FALSE(p.encoder.has_value());
  const Tensor z = random_set(3, 8, 4);
  EXPECT_TRUE(encode_set(p, z).same_storage(z));
}

TEST(HeadTest, ZeroWeightsGiveLastBias) {
  ModelParams p = init_params(small_config(), 1, 16);
  HeadParams h = p.head(HeadRole::kMain);
  for (Tensor* t : {&h.fc1_weight, &h.fc2_weight, &h.fc3_weight}) {
    for (double& v : t->mutable_values()) v = 0.0;
  }
  h.fc3_bias.mutable_values()[0] = 0.375;
  const Tensor scores = score_segments(h, random_set(5, 8, 17));
  for (double v : scores.values()) EXPECT_EQ(v, 0.375);
}

TEST(HeadTest, RowsAreScoredIndependently) {
  const ModelParams p = init_params(small_config(), 1, 18);
  const HeadParams& h = p.head(HeadRole::kMain);
  const Tensor z = random_set(6, 8, 19);
  const Tensor batch = score_segments(h, z);
  for (std::size_t i = 0; i < 6; ++i) {
    const Tensor single = score_segments(h, diff::slice(z, 0, i, 1));
    EXPECT_NEAR(single.item(), batch.at(i), 1e-12);
  }
}

TEST(HeadTest, MeanScoreGradientMatchesFiniteDifferences) {
  const ModelParams p = init_params(small_config(), 1, 20);
  const HeadParams& h = p.head(HeadRole::kMain);
  const Tensor z = random_set(4, 8, 21);
  std::vector<Tensor> params{h.fc1_weight, h.fc1_bias, h.fc2_weight,
                             h.fc2_bias,   h.fc3_weight, h.fc3_bias};
  diff::GradCheckOptions options;
  options.max_coordinates_per_tensor = 64;
  options.seed = 22;
  const auto result = diff::grad_check(
      [&] { return diff::mean(score_segments(h, z)); }, params, options);
  EXPECT_LE(result.max_relative_error, 1e-5);
}

TEST(CheckpointTest, RoundTripIsBitwise) {
  EncoderConfig c = small_config(8, 2, 2);
  c.input_dim = 6;
  const ModelParams p = init_params(c, 2, 23);
  const auto path = temp_path("roundtrip.ckpt");
  save_checkpoint(p, path);
  const ModelParams q = load_checkpoint(path, c);
  const auto a = p.named_parameters();
  const auto b = q.named_parameters();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, b[i].name);
    EXPECT_EQ(a[i].tensor.shape(), b[i].tensor.shape());
    EXPECT_TRUE(std::equal(a[i].tensor.values().begin(),
                           a[i].tensor.values().end(),
                           b[i].tensor.values().begin()))
        << a[i].name;
  }
  std::filesystem::remove(path);
}

TEST(CheckpointTest, HeadLayoutIsReadFromFile) {
  const HeadRole roles[] = {HeadRole::kCoarse};
  const ModelParams p = init_params(small_config(), roles, 24, false);
  const auto path = temp_path("coarse.ckpt");
  save_checkpoint(p, path);
  const ModelParams q = load_checkpoint(path, small_config());
  EXPECT_FALSE(q.encoder.has_value());
  EXPECT_TRUE(q.has_head(HeadRole::kCoarse));
  EXPECT_EQ(q.heads.size(), 1u);
  std::filesystem::remove(path);
}

FormatError::Kind load_error_kind(const std::filesystem::path& path,
                                  const EncoderConfig& config) {
  try {
    load_checkpoint(path, config);
  } catch (const FormatError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "load succeeded unexpectedly";
  return FormatError::Kind::kIo;
}

TEST(CheckpointTest, TruncatedFileIsTruncationError) {
  const ModelParams p = init_params(small_config(), 1, 25);
  const auto path = temp_path("truncated.ckpt");
  save_checkpoint(p, path);
  const auto full = std::filesystem::file_size(path);
  for (auto keep : {std::uintmax_t{2}, std::uintmax_t{10}, full / 2, full - 1}) {
    save_checkpoint(p, path);
    std::filesystem::resize_file(path, keep);
    EXPECT_EQ(load_error_kind(path, small_config()),
              FormatError::Kind::kTruncated)
        << "kept " << keep << " bytes";
  }
  std::filesystem::remove(path);
}

TEST(CheckpointTest, DimensionDisagreementIsShapeError) {
  const ModelParams p = init_params(small_config(8), 1, 26);
  const auto path = temp_path("d8.ckpt");
  save_checkpoint(p, path);
  EXPECT_EQ(load_error_kind(path, small_config(16)),
            FormatError::Kind::kShapeMismatch);
  EXPECT_EQ(load_error_kind(path, small_config(8, 3)),
            FormatError::Kind::kShapeMismatch);
  std::filesystem::remove(path);
}

TEST(CheckpointTest, VersionAndMagicErrors) {
  const ModelParams p = init_params(small_config(), 1, 27);
  const auto path = temp_path("header.ckpt");
  save_checkpoint(p, path);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(4);
    const char version[4] = {2, 0, 0, 0};
    f.write(version, 4);
  }
  EXPECT_EQ(load_error_kind(path, small_config()),
            FormatError::Kind::kBadVersion);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
  }
  EXPECT_EQ(load_error_kind(path, small_config()),
            FormatError::Kind::kBadMagic);
  std::filesystem::remove(path);
}

TEST(CheckpointTest, HeaderLayoutIsLittleEndian) {
  const ModelParams p = init_params(small_config(), 1, 28);
  const auto path = temp_path("layout.ckpt");
  save_checkpoint(p, path);
  std::ifstream in(path, std::ios::binary);
  std::vector<unsigned char> head(16);
  in.read(reinterpret_cast<char*>(head.data()), 16);
  EXPECT_EQ(std::string(head.begin(), head.begin() + 4), "SHLC");
  EXPECT_EQ(head[4], 1);
  EXPECT_EQ(head[5] | head[6] | head[7], 0);
  const std::size_t count = p.named_parameters().size();
  EXPECT_EQ(head[8], count & 0xff);
  // First name length, then the name itself.
  const std::string first = p.named_parameters()[0].name;
  EXPECT_EQ(head[12], first.size());
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace vhd::model
