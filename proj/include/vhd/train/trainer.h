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

#ifndef VHD_TRAIN_TRAINER_H_
#define VHD_TRAIN_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "vhd/data/video.h"
#include "vhd/model/config.h"
#include "vhd/model/params.h"

namespace vhd::train {

enum class Ablation { kNone, kNoTransformer, kCoarseOnly, kFineOnly, kNoDistill };
std::string_view ablation_name(Ablation a);
// Accepts "none", "no-transformer", "coarse-only", "fine-only",
// "no-distill", with '_' and '-' interchangeable.
Ablation parse_ablation(std::string_view text);

enum class Mode { kSl, kDl };

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t lr_decay_every = 20;
  double lr_decay_factor = 0.1;
  double base_lr = 1e-3;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::size_t set_size = 20;
  double lambda = 1.0;
  // 0 means one step per training video (source videos in dl mode).
  std::size_t steps_per_epoch = 0;
  std::uint64_t seed = 0;
  Ablation ablation = Ablation::kNone;
  bool detach_teacher = true;
  double clip_norm = 0.0;
  bool fp32_params = true;

  // Throws ConfigError / DomainError for unusable settings in `mode`.
  void validate(Mode mode) const;
  // Lambda after applying the no-distill ablation.
  double effective_lambda() const;
};

// base_lr * factor^floor(epoch / lr_decay_every) for 0 <= epoch < epochs.
double lr_at_epoch(const TrainConfig& config, std::size_t epoch);

struct LossRecord {
  std::size_t epoch = 0;
  std::size_t step = 0;
  double coarse = 0.0;
  double fine = 0.0;
  double distill = 0.0;
  double total = 0.0;
  double lr = 0.0;
};

struct LossLog {
  std::vector<LossRecord> records;

  // Mean total loss per epoch, in epoch order.
  std::vector<double> epoch_means() const;
  // "epoch,step,coarse,fine,distill,total,lr" header then one row per step,
  // values printed with 17 significant digits.
  void write_csv(const std::filesystem::path& path) const;
};

struct TrainResult {
  model::ModelParams params;
  LossLog log;
};

// Called after every epoch with the epoch index and the parameters.
using EpochCallback =
    std::function<void(std::size_t epoch, const model::ModelParams& params)>;

// Set-based training of a single scoring head (and the encoder unless the
// no-transformer ablation is selected). Each step draws a training video
// uniformly, samples a labeled set and takes one SGD step on the set loss.
// The fine column of the log carries the set loss.
TrainResult train_sl(const data::VideoCollection& corpus,
                     const model::EncoderConfig& model_config,
                     const TrainConfig& config,
                     const EpochCallback& on_epoch = {});

// Dual-learner training with a shared encoder. Each step draws one source
// and one target video independently, forms the source set, the target set
// and their mixture, and minimizes coarse + fine + lambda * distill with one
// backward pass. Target labels, if present, are ignored with a warning.
TrainResult train_dl(const data::VideoCollection& source,
                     const data::VideoCollection& target,
                     const model::EncoderConfig& model_config,
                     const TrainConfig& config,
                     const EpochCallback& on_epoch = {});

}  // namespace vhd::train

#endif  // VHD_TRAIN_TRAINER_H_
