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

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <ostream>
#include <thread>

#include "rio/cli.hpp"
#include "rio/simulator.hpp"

namespace rio::cli {

namespace {

std::string fmt(const char* format, double v) {
  if (v == 0.0) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

std::vector<StampedPose> read_reference(const std::string& path) {
  const std::string text = read_text_file(path);
  if (text.rfind("t,px,py,pz,qx,qy,qz,qw", 0) == 0) return parse_gt_csv(text, path);
  return parse_trajectory_tum(text, path);
}

double mean_points(const std::vector<OdometryOutput>& outputs) {
  if (outputs.empty()) return 0.0;
  double s = 0.0;
  for (const auto& o : outputs) s += static_cast<double>(o.counts.static_points + o.counts.matched);
  return s / static_cast<double>(outputs.size());
}

}  // namespace

OdometryConfig make_config(const SequenceMeta& meta, const std::string& config_path,
                           const std::vector<std::string>& disable) {
  OdometryConfig cfg;
  cfg.ext = meta.ext;
  cfg.gravity.g_z = meta.gravity_z;
  cfg.imu_rate_hz = meta.imu_rate_hz;
  if (!config_path.empty()) {
    apply_config(cfg, parse_key_values(read_text_file(config_path), config_path), config_path);
  }
  for (const auto& name : disable) {
    if (!cfg.estimator.ablation.set(name)) throw std::invalid_argument("unknown --disable flag '" + name + "'");
  }
  return cfg;
}

std::string format_report(const std::vector<OdometryOutput>& outputs, const std::vector<StampedPose>& gt) {
  std::vector<StampedPose> est;
  est.reserve(outputs.size());
  for (const auto& o : outputs) est.push_back(stamped(o.state));

  std::vector<double> inst(outputs.size(), std::numeric_limits<double>::quiet_NaN());
  const auto pairs = associate_by_time(est, gt);
  if (!pairs.empty()) {
    const auto [e0, g0] = pairs.front();
    const Pose anchor = gt[g0].pose() * est[e0].pose().inverse();
    for (const auto& [e, g] : pairs) inst[e] = ((anchor * est[e].pose()).t - gt[g].p).norm();
  }

  std::string out = "scan,t,raw,fov,radius,static,matched,landmarks,ape_t_inst\n";
  char buf[256];
  for (std::size_t k = 0; k < outputs.size(); ++k) {
    const auto& o = outputs[k];
    const auto& c = o.counts;
    std::snprintf(buf, sizeof(buf), "%ld,%s,%zu,%zu,%zu,%zu,%zu,%zu,%s\n", o.scan_index, fmt("%.9f", o.t).c_str(),
                  c.raw, c.fov, c.radius, c.static_points, c.matched, c.landmarks,
                  std::isnan(inst[k]) ? "nan" : fmt("%.9g", inst[k]).c_str());
    out += buf;
  }
  return out;
}

RunResult run_sequence(const Sequence& seq, const OdometryConfig& cfg) {
  RunResult res;
  try {
    res.outputs = run_odometry(cfg, seq.imu, seq.scans, [&res](const OdometryOutput& o) {
      if (o.diverged) {
        res.exit_code = kDiverged;
        res.error = o.note;
        return false;
      }
      return true;
    });
  } catch (const std::exception& e) {
    res.exit_code = kInputError;
    res.error = "scan " + std::to_string(res.outputs.size()) + ": " + e.what();
    return res;
  }
  for (const auto& o : res.outputs) res.trajectory.push_back(stamped(o.state));
  res.report_csv = format_report(res.outputs, seq.ground_truth);
  if (!seq.ground_truth.empty()) {
    try {
      res.metrics = evaluate_trajectory(res.trajectory, seq.ground_truth);
      res.has_metrics = true;
    } catch (const std::invalid_argument&) {
      res.has_metrics = false;
    }
  }
  return res;
}

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    if (opt.out.empty()) throw std::invalid_argument("--out is required");
    sim::SensorSimParams params = sim::noise_profile(opt.noise_profile);
    params.seed = opt.seed;
    if (opt.dynamic_frac >= 0.0) params.dynamic_frac = opt.dynamic_frac;
    if (opt.clutter_rate >= 0.0) params.clutter_rate = opt.clutter_rate;
    if (!params.valid()) throw std::invalid_argument("invalid simulation parameters");
    const sim::SimSequence s =
        sim::simulate(sim::parse_trajectory_kind(opt.kind), opt.duration, opt.speed, opt.yaw_rate, params);
    write_sequence(opt.out, to_sequence(s));
    out << "wrote " << s.scans.size() << " scans and " << s.imu.size() << " imu samples to " << opt.out << "\n";
    return kOk;
  } catch (const std::exception& e) {
    err << "simulate: " << e.what() << "\n";
    return kInputError;
  }
}

int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  Sequence seq;
  OdometryConfig cfg;
  try {
    seq = read_sequence(opt.seq);
    cfg = make_config(seq.meta, opt.config, opt.disable);
  } catch (const std::exception& e) {
    err << "run: " << e.what() << "\n";
    return kInputError;
  }
  const auto start = std::chrono::steady_clock::now();
  const RunResult res = run_sequence(seq, cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (res.exit_code == kInputError) {
    err << "run: " << res.error << "\n";
    return res.exit_code;
  }
  try {
    if (!opt.out.empty()) write_text_file(opt.out, export_trajectory_tum(res.trajectory));
    if (!opt.report.empty()) {
      write_text_file(opt.report, res.report_csv);
      write_text_file(opt.report + ".config", format_config(cfg));
    }
  } catch (const std::exception& e) {
    err << "run: " << e.what() << "\n";
    return kInputError;
  }
  if (res.exit_code == kDiverged) {
    err << "run: " << res.error << "\n";
    return kDiverged;
  }
  out << "scans," << res.outputs.size() << "\n";
  if (res.has_metrics) {
    out << "ape_trans_rmse," << fmt("%.9g", res.metrics.ape_trans_rmse) << "\n"
        << "ape_rot_rmse," << fmt("%.9g", res.metrics.ape_rot_rmse) << "\n"
        << "rpe_trans_rmse," << fmt("%.9g", res.metrics.rpe_trans_rmse) << "\n"
        << "rpe_rot_rmse," << fmt("%.9g", res.metrics.rpe_rot_rmse) << "\n";
  }
  out << "wall_time_s," << fmt("%.3f", wall) << "\n";
  return kOk;
}

int cmd_eval(const EvalOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    if (opt.align != "se3" && opt.align != "none") throw std::invalid_argument("--align must be se3 or none");
    const auto est = read_reference(opt.est);
    const auto gt = read_reference(opt.gt);
    const Metrics m = evaluate_trajectory(est, gt, opt.rpe_delta, opt.align == "se3" ? Alignment::kSE3 : Alignment::kNone);
    out << "ape_trans_rmse,ape_rot_rmse,rpe_trans_rmse,rpe_rot_rmse\n"
        << fmt("%.9g", m.ape_trans_rmse) << "," << fmt("%.9g", m.ape_rot_rmse) << ","
        << fmt("%.9g", m.rpe_trans_rmse) << "," << fmt("%.9g", m.rpe_rot_rmse) << "\n";
    return kOk;
  } catch (const std::exception& e) {
    err << "eval: " << e.what() << "\n";
    return kInputError;
  }
}

int cmd_ablate(const AblateOptions& opt, std::ostream& out, std::ostream& err) {
  Sequence seq;
  OdometryConfig base;
  try {
    seq = read_sequence(opt.seq);
    base = make_config(seq.meta, opt.config, {});
  } catch (const std::exception& e) {
    err << "ablate: " << e.what() << "\n";
    return kInputError;
  }
  const std::vector<std::string> variants = {"full",          "imu_residual",    "doppler_residual",
                                             "p2p_residual",  "velocity_filter", "rcs_filter"};
  std::vector<RunResult> results(variants.size());
  auto run_variant = [&](std::size_t i) {
    OdometryConfig cfg = base;
    if (i > 0) cfg.estimator.ablation.set(variants[i]);
    results[i] = run_sequence(seq, cfg);
  };
  const std::size_t jobs = opt.jobs > 0 ? static_cast<std::size_t>(opt.jobs) : variants.size();
  for (std::size_t begin = 0; begin < variants.size(); begin += jobs) {
    std::vector<std::thread> pool;
    for (std::size_t i = begin; i < std::min(variants.size(), begin + jobs); ++i) pool.emplace_back(run_variant, i);
    for (auto& t : pool) t.join();
  }

  std::string table = "variant,ape_trans_rmse,ape_rot_rmse,rpe_trans_rmse,rpe_rot_rmse,mean_points,diverged\n";
  for (std::size_t i = 0; i < variants.size(); ++i) {
    const RunResult& r = results[i];
    if (r.exit_code == kInputError) {
      err << "ablate: " << variants[i] << ": " << r.error << "\n";
      return kInputError;
    }
    Metrics m;
    bool have = r.has_metrics;
    if (!have && !seq.ground_truth.empty() && r.exit_code == kDiverged) {
      try {
        m = evaluate_trajectory(r.trajectory, seq.ground_truth);
        have = true;
      } catch (const std::invalid_argument&) {
      }
    } else {
      m = r.metrics;
    }
    const std::string name = i == 0 ? "full" : "w/o " + variants[i];
    auto cell = [&](double v) { return have ? fmt("%.9g", v) : std::string("nan"); };
    table += name + "," + cell(m.ape_trans_rmse) + "," + cell(m.ape_rot_rmse) + "," + cell(m.rpe_trans_rmse) + "," +
             cell(m.rpe_rot_rmse) + "," + fmt("%.9g", mean_points(r.outputs)) + "," +
             (r.exit_code == kDiverged ? "1" : "0") + "\n";
  }
  try {
    if (opt.out.empty()) {
      out << table;
    } else {
      write_text_file(opt.out, table);
    }
  } catch (const std::exception& e) {
    err << "ablate: " << e.what() << "\n";
    return kInputError;
  }
  return kOk;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Radar-inertial odometry toolkit"};
  app.require_subcommand(1);

  SimulateOptions sim_opt;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic sequence directory");
  sim_cmd->add_option("--kind", sim_opt.kind, "circle | figure8 | random_smooth")->capture_default_str();
  sim_cmd->add_option("--duration", sim_opt.duration, "Seconds")->capture_default_str();
  sim_cmd->add_option("--speed", sim_opt.speed, "m/s")->capture_default_str();
  sim_cmd->add_option("--yaw-rate", sim_opt.yaw_rate, "rad/s")->capture_default_str();
  sim_cmd->add_option("--dynamic-frac", sim_opt.dynamic_frac, "Share of moving-object detections");
  sim_cmd->add_option("--clutter-rate", sim_opt.clutter_rate, "Mean clutter points per scan");
  sim_cmd->add_option("--noise-profile", sim_opt.noise_profile, "none | noisy")->capture_default_str();
  sim_cmd->add_option("--seed", sim_opt.seed)->capture_default_str();
  sim_cmd->add_option("--out", sim_opt.out, "Output directory")->required();

  RunOptions run_opt;
  auto* run_cmd = app.add_subcommand("run", "Run odometry over a sequence directory");
  run_cmd->add_option("--seq", run_opt.seq, "Sequence directory")->required();
  run_cmd->add_option("--config", run_opt.config, "key = value configuration file");
  run_cmd->add_option("--disable", run_opt.disable,
                      "imu_residual | doppler_residual | p2p_residual | velocity_filter | rcs_filter");
  run_cmd->add_option("--out", run_opt.out, "TUM trajectory output");
  run_cmd->add_option("--report", run_opt.report, "Per-scan report CSV");

  EvalOptions eval_opt;
  auto* eval_cmd = app.add_subcommand("eval", "APE/RPE of an estimate against ground truth");
  eval_cmd->add_option("--est", eval_opt.est, "TUM trajectory")->required();
  eval_cmd->add_option("--gt", eval_opt.gt, "gt.csv or TUM trajectory")->required();
  eval_cmd->add_option("--rpe-delta", eval_opt.rpe_delta)->capture_default_str();
  eval_cmd->add_option("--align", eval_opt.align, "se3 | none")->capture_default_str();

  AblateOptions abl_opt;
  auto* abl_cmd = app.add_subcommand("ablate", "Full system and the five ablated variants");
  abl_cmd->add_option("--seq", abl_opt.seq, "Sequence directory")->required();
  abl_cmd->add_option("--config", abl_opt.config, "key = value configuration file");
  abl_cmd->add_option("--out", abl_opt.out, "Table CSV (stdout when omitted)");
  abl_cmd->add_option("--jobs", abl_opt.jobs, "Parallel variants, 0 for all")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }
  if (sim_cmd->parsed()) return cmd_simulate(sim_opt, out, err);
  if (run_cmd->parsed()) return cmd_run(run_opt, out, err);
  if (eval_cmd->parsed()) return cmd_eval(eval_opt, out, err);
  return cmd_ablate(abl_opt, out, err);
}

}  // namespace rio::cli
