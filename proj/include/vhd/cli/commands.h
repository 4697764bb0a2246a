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

#ifndef VHD_CLI_COMMANDS_H_
#define VHD_CLI_COMMANDS_H_

#include <ostream>
#include <string>
#include <vector>

#include "vhd/cli/run_config.h"
#include "vhd/data/video.h"
#include "vhd/train/trainer.h"

namespace vhd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

// Entry point behind the `vhd` executable. args[0] is the program name.
// Returns the process exit code; messages go to `out` and `err`.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

enum class SweepAxis { kSetSize, kLambda };
SweepAxis parse_sweep_axis(std::string_view text);

struct SweepPoint {
  double value = 0.0;
  double map = 0.0;
};

// Trains one model per value (set-based or dual-learner per
// sweep.mode) with the same seed and reports test mAP: the target category
// in dual-learner mode, data.category (or every category) otherwise.
std::vector<SweepPoint> run_sweep(const RunConfig& config, SweepAxis axis,
                                  const std::vector<double>& values,
                                  const data::VideoCollection& train_source,
                                  const data::VideoCollection& train_target,
                                  const data::VideoCollection& test);

// Trains per the config's mode and returns mean test mAP, scoring with the
// mode implied by the ablation.
double train_and_evaluate(const RunConfig& config, train::Mode mode,
                          const data::VideoCollection& train_source,
                          const data::VideoCollection& train_target,
                          const data::VideoCollection& test);

}  // namespace vhd::cli

#endif  // VHD_CLI_COMMANDS_H_
