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

#include "vhd/cli/commands.h"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "vhd/data/formats.h"
#include "vhd/data/synthetic.h"
#include "vhd/error.h"
#include "vhd/eval/eval.h"
#include "vhd/model/checkpoint.h"

namespace vhd::cli {
namespace {

namespace fs = std::filesystem;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool force = false;
  std::vector<std::string> sets;
  std::string ablation;
  std::string mode;
  std::string checkpoint;
  std::string axis;
  std::vector<std::string> values;
};

RunConfig resolve_config(const CommonFlags& f) {
  RunConfig c = f.config_path.empty() ? RunConfig()
                                      : RunConfig::from_file(f.config_path);
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set expects key=value, got '" + s + "'");
    }
    c.set(s.substr(0, eq), s.substr(eq + 1));
  }
  if (f.seed) c.set("seed", std::to_string(*f.seed));
  if (!f.ablation.empty()) c.set("train.ablation", f.ablation);
  if (!f.mode.empty()) c.set("eval.mode", f.mode);
  return c;
}

fs::path prepare_out_dir(const std::string& dir) {
  if (dir.empty()) throw ConfigError("--out is required");
  fs::create_directories(dir);
  return dir;
}

data::Manifest manifest_of(const RunConfig& c) {
  const std::string path = c.get("data.manifest");
  if (path.empty()) throw ConfigError("data.manifest is not set");
  return data::read_manifest(path);
}

std::optional<std::string_view> optional_category(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::string_view(s);
}

eval::ScoreMode mode_for(const RunConfig& c, const model::ModelParams& p) {
  const std::string& m = c.get("eval.mode");
  if (m != "auto") return eval::parse_score_mode(m);
  if (p.has_head(model::HeadRole::kMain)) return eval::ScoreMode::kSl;
  if (p.has_head(model::HeadRole::kCoarse) &&
      p.has_head(model::HeadRole::kFine)) {
    return eval::ScoreMode::kAveraged;
  }
  return p.has_head(model::HeadRole::kCoarse) ? eval::ScoreMode::kCoarse
                                              : eval::ScoreMode::kFine;
}

void check_dims(const data::VideoCollection& videos,
                const model::ModelParams& params) {
  if (!videos.empty() && videos.dim() != params.config.feature_dim()) {
    throw DimensionError("features have dim " + std::to_string(videos.dim()) +
                         " but the checkpoint expects " +
                         std::to_string(params.config.feature_dim()));
  }
}

int cmd_gen_synth(const CommonFlags& f, std::ostream& out) {
  const RunConfig c = resolve_config(f);
  if (f.out_dir.empty()) throw ConfigError("--out is required");
  const fs::path dir = f.out_dir;
  if (fs::exists(dir) && !fs::is_empty(dir) && !f.force) {
    throw ConfigError("output directory " + dir.string() +
                      " is not empty; pass --force to overwrite");
  }
  const auto corpus = data::gen_synthetic_corpus(c.synth_spec(), c.get_u64("seed"));
  fs::create_directories(dir);
  data::write_synthetic_corpus(corpus, dir,
                               c.get_list("synth.unlabeled_train_categories"));
  c.write_resolved(dir / "resolved.cfg");
  out << "wrote " << corpus.videos.size() << " videos to "
      << (dir / "manifest.tsv").string() << "\n";
  return kExitOk;
}

int cmd_train(const CommonFlags& f, train::Mode mode, std::ostream& out) {
  const RunConfig c = resolve_config(f);
  const fs::path dir = prepare_out_dir(f.out_dir);
  const data::Manifest manifest = manifest_of(c);
  const auto mc = c.encoder_config();
  const auto tc = c.train_config();
  tc.validate(mode);
  c.write_resolved(dir / "resolved.cfg");
  train::TrainResult result;
  if (mode == train::Mode::kSl) {
    const std::string category = c.get("data.category");
    const auto videos = data::load_videos(manifest, data::Split::kTrain,
                                          optional_category(category));
    result = train::train_sl(videos, mc, tc);
  } else {
    const std::string src = c.get("data.source_category");
    const std::string tgt = c.get("data.target_category");
    if (src.empty() || tgt.empty()) {
      throw ConfigError("dual-learner training needs source and target categories");
    }
    const auto source = data::load_videos(manifest, data::Split::kTrain, src);
    const auto target = data::load_videos(manifest, data::Split::kTrain, tgt);
    result = train::train_dl(source, target, mc, tc);
  }
  model::save_checkpoint(result.params, dir / "model.ckpt");
  result.log.write_csv(dir / "loss_log.csv");
  const auto means = result.log.epoch_means();
  out << "trained " << means.size() << " epochs, final mean loss "
      << std::setprecision(6) << means.back() << "; checkpoint "
      << (dir / "model.ckpt").string() << "\n";
  return kExitOk;
}

int cmd_score(const CommonFlags& f, bool with_metrics, std::ostream& out) {
  const RunConfig c = resolve_config(f);
  if (f.checkpoint.empty()) throw ConfigError("--checkpoint is required");
  const fs::path dir = prepare_out_dir(f.out_dir);
  const auto params = model::load_checkpoint(f.checkpoint, c.encoder_config());
  const data::Manifest manifest = manifest_of(c);
  const std::string category = c.get("eval.category");
  const auto videos = data::load_videos(
      manifest, data::parse_split(c.get("eval.split")),
      optional_category(category));
  if (videos.empty()) throw DomainError("no videos to score");
  check_dims(videos, params);
  c.write_resolved(dir / "resolved.cfg");
  const auto tracks = eval::score_collection(
      params, videos, c.get_size("train.set_size"), mode_for(c, params));
  eval::write_score_tracks(tracks, dir / "scores.csv");
  if (!with_metrics) {
    out << "scored " << tracks.size() << " videos\n";
    return kExitOk;
  }
  const auto rows = eval::evaluate(tracks, videos, c.get_size("eval.top_k"),
                                   c.get_double("eval.threshold"));
  eval::write_metrics(rows, dir / "metrics.csv");
  for (const auto& r : rows) {
    out << r.metric << ',' << r.category << ',' << std::setprecision(6)
        << r.value << '\n';
  }
  return kExitOk;
}

std::vector<double> parse_values(const std::vector<std::string>& raw) {
  std::vector<double> out;
  for (const auto& item : raw) {
    std::string_view rest = item;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view s = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{}
                                             : rest.substr(comma + 1);
      if (s.empty()) continue;
      double v = 0.0;
      const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || end != s.data() + s.size()) {
        throw ConfigError("sweep value '" + std::string(s) + "' is not a number");
      }
      out.push_back(v);
    }
  }
  if (out.empty()) throw ConfigError("--values needs at least one value");
  return out;
}

train::Mode sweep_mode(const RunConfig& c) {
  const std::string& m = c.get("sweep.mode");
  if (m == "sl") return train::Mode::kSl;
  if (m == "dl") return train::Mode::kDl;
  throw ConfigError("sweep.mode must be sl or dl");
}

int cmd_sweep(const CommonFlags& f, std::ostream& out) {
  const RunConfig c = resolve_config(f);
  const fs::path dir = prepare_out_dir(f.out_dir);
  const SweepAxis axis = parse_sweep_axis(f.axis);
  const std::vector<double> values = parse_values(f.values);
  const data::Manifest manifest = manifest_of(c);
  const train::Mode mode = sweep_mode(c);
  c.write_resolved(dir / "resolved.cfg");
  data::InMemoryCollection source, target, test;
  if (mode == train::Mode::kDl) {
    source = data::load_videos(manifest, data::Split::kTrain,
                               c.get("data.source_category"));
    target = data::load_videos(manifest, data::Split::kTrain,
                               c.get("data.target_category"));
    test = data::load_videos(manifest, data::Split::kTest,
                             c.get("data.target_category"));
  } else {
    const std::string category = c.get("data.category");
    source = data::load_videos(manifest, data::Split::kTrain,
                               optional_category(category));
    test = data::load_videos(manifest, data::Split::kTest,
                             optional_category(category));
  }
  const auto points = run_sweep(c, axis, values, source, target, test);
  std::ofstream table(dir / "sweep.csv", std::ios::trunc);
  if (!table) {
    throw FormatError(FormatError::Kind::kIo, "cannot write sweep.csv");
  }
  table << "value,map\n" << std::setprecision(17);
  out << "value,map\n";
  for (const auto& p : points) {
    table << p.value << ',' << p.map << '\n';
    out << p.value << ',' << std::setprecision(6) << p.map << '\n';
  }
  return kExitOk;
}

}  // namespace

SweepAxis parse_sweep_axis(std::string_view text) {
  if (text == "N" || text == "n" || text == "set_size") return SweepAxis::kSetSize;
  if (text == "lambda") return SweepAxis::kLambda;
  throw ConfigError("sweep axis must be N or lambda, got '" +
                    std::string(text) + "'");
}

double train_and_evaluate(const RunConfig& config, train::Mode mode,
                          const data::VideoCollection& train_source,
                          const data::VideoCollection& train_target,
                          const data::VideoCollection& test) {
  const auto mc = config.encoder_config();
  const auto tc = config.train_config();
  const train::TrainResult r =
      mode == train::Mode::kSl
          ? train::train_sl(train_source, mc, tc)
          : train::train_dl(train_source, train_target, mc, tc);
  const auto tracks = eval::score_collection(r.params, test, tc.set_size,
                                             mode_for(config, r.params));
  std::vector<std::vector<double>> labels;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (!test.video(i).has_labels()) {
      throw DomainError("test video " + test.video(i).video_id +
                        " has no annotation");
    }
    labels.push_back(*test.video(i).labels);
  }
  return eval::mean_ap(tracks, labels, config.get_double("eval.threshold"));
}

std::vector<SweepPoint> run_sweep(const RunConfig& config, SweepAxis axis,
                                  const std::vector<double>& values,
                                  const data::VideoCollection& train_source,
                                  const data::VideoCollection& train_target,
                                  const data::VideoCollection& test) {
  const train::Mode mode = sweep_mode(config);
  std::vector<SweepPoint> points;
  for (double v : values) {
    RunConfig c = config;
    if (axis == SweepAxis::kSetSize) {
      if (v < 2 || v != std::floor(v)) {
        throw DomainError("set sizes must be integers >= 2");
      }
      c.set("train.set_size", std::to_string(static_cast<std::size_t>(v)));
    } else {
      std::ostringstream ss;
      ss << std::setprecision(17) << v;
      c.set("train.lambda", ss.str());
    }
    c.train_config().validate(mode);
    points.push_back({v, train_and_evaluate(c, mode, train_source,
                                            train_target, test)});
    spdlog::info("sweep value {} -> mAP {:.4f}", v, points.back().map);
  }
  return points;
}

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Set-based video highlight detection toolkit"};
  app.require_subcommand(1);
  CommonFlags f;
  auto add_common = [&f](CLI::App* sub) {
    sub->add_option("--config", f.config_path, "key = value config file");
    sub->add_option("--seed", f.seed, "root seed (overrides config)");
    sub->add_option("--out", f.out_dir, "output directory");
    sub->add_flag("--force", f.force, "overwrite a non-empty output directory");
    sub->add_option("--set", f.sets, "config override key=value");
  };
  auto* gen = app.add_subcommand("gen-synth", "write a synthetic corpus");
  auto* tsl = app.add_subcommand("train-sl", "set-based training");
  auto* tdl = app.add_subcommand("train-dl", "dual-learner training");
  auto* score = app.add_subcommand("score", "write per-segment scores");
  auto* ev = app.add_subcommand("eval", "scores plus mAP report");
  auto* sweep = app.add_subcommand("sweep", "mAP as a function of N or lambda");
  for (auto* s : {gen, tsl, tdl, score, ev, sweep}) add_common(s);
  for (auto* s : {tsl, tdl, sweep}) {
    s->add_option("--ablation", f.ablation, "train.ablation override");
  }
  for (auto* s : {score, ev}) {
    s->add_option("--checkpoint", f.checkpoint, "model checkpoint");
    s->add_option("--mode", f.mode, "sl | coarse | fine | averaged");
  }
  sweep->add_option("--axis", f.axis, "N | lambda")->required();
  sweep->add_option("--values", f.values, "comma-separated values")
      ->required()
      ->delimiter(',');

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_synth(f, out);
    if (tsl->parsed()) return cmd_train(f, train::Mode::kSl, out);
    if (tdl->parsed()) return cmd_train(f, train::Mode::kDl, out);
    if (score->parsed()) return cmd_score(f, false, out);
    if (ev->parsed()) return cmd_score(f, true, out);
    if (sweep->parsed()) return cmd_sweep(f, out);
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace vhd::cli
