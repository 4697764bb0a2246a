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

#include "vhd/train/trainer.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <random>
#include <string>

#include "vhd/data/sampling.h"
#include "vhd/diffcore/ops.h"
#include "vhd/diffcore/tape.h"
#include "vhd/error.h"
#include "vhd/loss/losses.h"
#include "vhd/model/forward.h"
#include "vhd/rng.h"
#include "vhd/train/optimizer.h"

namespace vhd::train {
namespace {

using diff::Tensor;
using model::HeadRole;

std::string normalized(std::string_view text) {
  std::string s(text);
  std::replace(s.begin(), s.end(), '_', '-');
  return s;
}

Sgd make_optimizer(const model::ModelParams& params, const TrainConfig& c) {
  Sgd::Options o;
  o.momentum = c.momentum;
  o.weight_decay = c.weight_decay;
  o.clip_norm = c.clip_norm;
  o.fp32_params = c.fp32_params;
  return Sgd(params.parameters(), o);
}

void check_finite(double value, const char* what) {
  if (!std::isfinite(value)) {
    throw NumericalError(std::string("non-finite ") + what + " loss");
  }
}

std::size_t pick(std::size_t n, Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace

std::string_view ablation_name(Ablation a) {
  switch (a) {
    case Ablation::kNone:
      return "none";
    case Ablation::kNoTransformer:
      return "no-transformer";
    case Ablation::kCoarseOnly:
      return "coarse-only";
    case Ablation::kFineOnly:
      return "fine-only";
    case Ablation::kNoDistill:
      return "no-distill";
  }
  return "?";
}

Ablation parse_ablation(std::string_view text) {
  const std::string s = normalized(text);
  for (Ablation a : {Ablation::kNone, Ablation::kNoTransformer,
                     Ablation::kCoarseOnly, Ablation::kFineOnly,
                     Ablation::kNoDistill}) {
    if (s == ablation_name(a)) return a;
  }
  throw ConfigError("unknown ablation '" + std::string(text) + "'");
}

void TrainConfig::validate(Mode mode) const {
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (lr_decay_every == 0) throw ConfigError("lr_decay_every must be positive");
  if (!(base_lr > 0.0) || !std::isfinite(base_lr)) {
    throw ConfigError("base_lr must be positive");
  }
  if (!(lr_decay_factor > 0.0) || lr_decay_factor > 1.0) {
    throw ConfigError("lr_decay_factor must lie in (0, 1]");
  }
  if (momentum < 0.0 || momentum >= 1.0) {
    throw ConfigError("momentum must lie in [0, 1)");
  }
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (clip_norm < 0.0) throw ConfigError("clip_norm must be >= 0");
  if (set_size < 2) throw DomainError("set size must be at least 2");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw DomainError("lambda must be finite and non-negative");
  }
  if (mode == Mode::kDl) {
    if (set_size % 2 != 0) {
      throw DomainError("dual-learner training needs an even set size");
    }
    if (ablation == Ablation::kNoTransformer) {
      throw ConfigError("no-transformer applies to set-based training only");
    }
  } else if (ablation != Ablation::kNone &&
             ablation != Ablation::kNoTransformer) {
    throw ConfigError("ablation " + std::string(ablation_name(ablation)) +
                      " applies to dual-learner training only");
  }
}

double TrainConfig::effective_lambda() const {
  return ablation == Ablation::kNoDistill ? 0.0 : lambda;
}

double lr_at_epoch(const TrainConfig& config, std::size_t epoch) {
  if (epoch >= config.epochs) {
    throw DomainError("epoch " + std::to_string(epoch) + " outside [0, " +
                      std::to_string(config.epochs) + ")");
  }
  if (config.lr_decay_every == 0) throw ConfigError("lr_decay_every is zero");
  double lr = config.base_lr;
  for (std::size_t k = epoch / config.lr_decay_every; k > 0; --k) {
    lr *= config.lr_decay_factor;
  }
  return lr;
}

std::vector<double> LossLog::epoch_means() const {
  std::vector<double> sums, counts;
  for (const auto& r : records) {
    if (r.epoch >= sums.size()) {
      sums.resize(r.epoch + 1, 0.0);
      counts.resize(r.epoch + 1, 0.0);
    }
    sums[r.epoch] += r.total;
    counts[r.epoch] += 1.0;
  }
  for (std::size_t i = 0; i < sums.size(); ++i) {
    if (counts[i] > 0.0) sums[i] /= counts[i];
  }
  return sums;
}

void LossLog::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw FormatError(FormatError::Kind::kIo,
                      "cannot open " + path.string() + " for writing");
  }
  out << "epoch,step,coarse,fine,distill,total,lr\n" << std::setprecision(17);
  for (const auto& r : records) {
    out << r.epoch << ',' << r.step << ',' << r.coarse << ',' << r.fine << ','
        << r.distill << ',' << r.total << ',' << r.lr << '\n';
  }
  if (!out) {
    throw FormatError(FormatError::Kind::kIo, "write failed: " + path.string());
  }
}

TrainResult train_sl(const data::VideoCollection& corpus,
                     const model::EncoderConfig& model_config,
                     const TrainConfig& config,
                     const EpochCallback& on_epoch) {
  config.validate(Mode::kSl);
  model_config.validate();
  if (corpus.empty()) throw DomainError("empty training corpus");
  if (corpus.dim() != model_config.feature_dim()) {
    throw DimensionError("corpus features have dim " +
                         std::to_string(corpus.dim()) + ", model expects " +
                         std::to_string(model_config.feature_dim()));
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!corpus.video(i).has_labels()) {
      throw DomainError("training video " + corpus.video(i).video_id +
                        " has no labels");
    }
  }

  const HeadRole roles[] = {HeadRole::kMain};
  TrainResult result{
      model::init_params(model_config, roles, derive_seed(config.seed, "init"),
                         config.ablation != Ablation::kNoTransformer),
      {}};
  model::ModelParams& params = result.params;
  params.set_requires_grad(true);
  Sgd sgd = make_optimizer(params, config);
  Rng sampling = make_rng(config.seed, "sampling");
  Rng dropout = make_rng(config.seed, "dropout");
  model::ForwardOptions forward;
  forward.dropout_rng = &dropout;
  const std::size_t steps =
      config.steps_per_epoch == 0 ? corpus.size() : config.steps_per_epoch;
  const auto& head = params.head(HeadRole::kMain);

  diff::Tape tape;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_at_epoch(config, epoch);
    for (std::size_t step = 0; step < steps; ++step) {
      const auto& video = corpus.video(pick(corpus.size(), sampling));
      const data::SegmentSet set =
          data::sample_training_set(video, config.set_size, sampling);
      tape.clear();
      sgd.zero_grad();
      Tensor loss;
      {
        diff::TapeScope scope(tape);
        const Tensor z = model::encode_set(params, set.features, forward);
        loss = loss::set_pred_loss(set.labels(),
                                   model::score_segments(head, z));
      }
      check_finite(loss.item(), "set prediction");
      tape.backward(loss);
      sgd.step(lr);
      result.log.records.push_back(
          {epoch, step, 0.0, loss.item(), 0.0, loss.item(), lr});
    }
    if (on_epoch) on_epoch(epoch, params);
  }
  tape.clear();
  params.zero_grad();
  params.set_requires_grad(false);
  return result;
}

TrainResult train_dl(const data::VideoCollection& source,
                     const data::VideoCollection& target,
                     const model::EncoderConfig& model_config,
                     const TrainConfig& config,
                     const EpochCallback& on_epoch) {
  config.validate(Mode::kDl);
  model_config.validate();
  const bool use_coarse = config.ablation != Ablation::kFineOnly;
  const bool use_fine = config.ablation != Ablation::kCoarseOnly;
  const bool use_distill = use_coarse && use_fine;
  // Only the coarse learner and the distillation term look at target data.
  const bool needs_target = use_coarse;
  const double lambda = config.effective_lambda();

  if (source.empty()) throw DomainError("empty source corpus");
  if (source.dim() != model_config.feature_dim()) {
    throw DimensionError("source features have dim " +
                         std::to_string(source.dim()) + ", model expects " +
                         std::to_string(model_config.feature_dim()));
  }
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (!source.video(i).has_labels()) {
      throw DomainError("source video " + source.video(i).video_id +
                        " has no labels");
    }
  }
  if (needs_target) {
    if (target.empty()) throw DomainError("empty target corpus");
    if (target.dim() != source.dim()) {
      throw DimensionError("source and target feature dims differ");
    }
    for (std::size_t i = 0; i < target.size(); ++i) {
      if (target.video(i).has_labels()) {
        spdlog::warn(
            "target corpus carries labels; they are ignored during training");
        break;
      }
    }
  }

  std::vector<HeadRole> roles;
  if (use_coarse) roles.push_back(HeadRole::kCoarse);
  if (use_fine) roles.push_back(HeadRole::kFine);
  TrainResult result{
      model::init_params(model_config, roles, derive_seed(config.seed, "init")),
      {}};
  model::ModelParams& params = result.params;
  params.set_requires_grad(true);
  Sgd sgd = make_optimizer(params, config);
  Rng sampling = make_rng(config.seed, "sampling");
  Rng dropout = make_rng(config.seed, "dropout");
  model::ForwardOptions forward;
  forward.dropout_rng = &dropout;
  const std::size_t steps =
      config.steps_per_epoch == 0 ? source.size() : config.steps_per_epoch;

  diff::Tape tape;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_at_epoch(config, epoch);
    for (std::size_t step = 0; step < steps; ++step) {
      const auto& sv = source.video(pick(source.size(), sampling));
      const data::SegmentSet xs =
          data::sample_training_set(sv, config.set_size, sampling);
      std::optional<data::SegmentSet> xt, xm;
      if (needs_target) {
        const auto& tv = target.video(pick(target.size(), sampling));
        xt = data::sample_target_set(tv, config.set_size, sampling);
        xm = data::build_mixed_set(xs, *xt, sampling);
      }

      tape.clear();
      sgd.zero_grad();
      LossRecord rec{epoch, step, 0.0, 0.0, 0.0, 0.0, lr};
      Tensor total;
      {
        diff::TapeScope scope(tape);
        std::vector<Tensor> terms;
        if (use_coarse) {
          const Tensor zm = model::encode_set(params, xm->features, forward);
          const Tensor l = loss::coarse_loss(
              xm->labels(),
              model::score_segments(params.head(HeadRole::kCoarse), zm));
          rec.coarse = l.item();
          terms.push_back(l);
        }
        if (use_fine) {
          const Tensor zs = model::encode_set(params, xs.features, forward);
          const Tensor l = loss::fine_loss(
              xs.labels(),
              model::score_segments(params.head(HeadRole::kFine), zs));
          rec.fine = l.item();
          terms.push_back(l);
        }
        if (use_distill) {
          // With zero weight the term is still logged but kept off the tape.
          std::optional<diff::NoGradScope> off;
          if (lambda == 0.0) off.emplace();
          const Tensor zt = model::encode_set(params, xt->features, forward);
          const Tensor l = loss::distill_loss(
              model::score_segments(params.head(HeadRole::kCoarse), zt),
              model::score_segments(params.head(HeadRole::kFine), zt),
              config.detach_teacher);
          rec.distill = l.item();
          if (lambda != 0.0) terms.push_back(diff::scale(l, lambda));
        }
        total = terms.front();
        for (std::size_t i = 1; i < terms.size(); ++i) {
          total = diff::add(total, terms[i]);
        }
      }
      rec.total = total.item();
      check_finite(rec.total, "total");
      tape.backward(total);
      sgd.step(lr);
      result.log.records.push_back(rec);
    }
    if (on_epoch) on_epoch(epoch, params);
  }
  tape.clear();
  params.zero_grad();
  params.set_requires_grad(false);
  return result;
}

}  // namespace vhd::train
