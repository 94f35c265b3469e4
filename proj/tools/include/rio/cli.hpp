// Copyright 2026 The rio Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rio/io_eval.hpp"
#include "rio/odometry.hpp"

namespace rio::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kDiverged = 3 };

struct SimulateOptions {
  std::string kind = "circle";
  double duration = 60.0;
  double speed = 1.0;
  double yaw_rate = 0.2;
  double dynamic_frac = -1.0;  // negative keeps the noise profile's value
  double clutter_rate = -1.0;
  std::string noise_profile = "none";
  std::uint64_t seed = 1;
  std::string out;
};

struct RunOptions {
  std::string seq;
  std::string config;
  std::vector<std::string> disable;
  std::string out;
  std::string report;
};

struct EvalOptions {
  std::string est;
  std::string gt;
  int rpe_delta = 1;
  std::string align = "se3";
};

struct AblateOptions {
  std::string seq;
  std::string config;
  std::string out;
  int jobs = 0;  // 0: one thread per variant
};

/// Outcome of one odometry run over a loaded sequence.
struct RunResult {
  int exit_code = kOk;
  std::vector<OdometryOutput> outputs;
  std::vector<StampedPose> trajectory;
  std::string report_csv;
  bool has_metrics = false;
  Metrics metrics;
  std::string error;
};

/// Builds the odometry configuration from the sequence meta, an optional
/// config file and --disable flags, in that order of precedence.
OdometryConfig make_config(const SequenceMeta& meta, const std::string& config_path,
                           const std::vector<std::string>& disable);

RunResult run_sequence(const Sequence& seq, const OdometryConfig& cfg);

/// Per-scan report rows, header `scan,t,raw,fov,radius,static,matched,landmarks,ape_t_inst`.
std::string format_report(const std::vector<OdometryOutput>& outputs, const std::vector<StampedPose>& gt);

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err);
int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalOptions& opt, std::ostream& out, std::ostream& err);
int cmd_ablate(const AblateOptions& opt, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rio::cli
