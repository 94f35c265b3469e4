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

#include <benchmark/benchmark.h>

#include <memory>
#include <random>
#include <span>

#include "rio/association.hpp"
#include "rio/estimator.hpp"
#include "rio/imu_preint.hpp"
#include "rio/odometry.hpp"
#include "rio/preprocess.hpp"
#include "rio/simulator.hpp"

namespace {

using namespace rio;

const sim::SimSequence& noisy_sequence() {
  static const sim::SimSequence seq = [] {
    sim::SensorSimParams p = sim::noise_profile("noisy");
    p.seed = 1;
    return sim::simulate(sim::TrajectoryKind::kCircle, 30.0, 1.0, 0.2, p);
  }();
  return seq;
}

OdometryConfig config_for(const sim::SimSequence& s) {
  OdometryConfig cfg;
  cfg.ext = s.params.ext;
  cfg.gravity = s.params.gravity;
  cfg.imu_rate_hz = s.params.imu_rate_hz;
  return cfg;
}

void BM_Preintegrate(benchmark::State& state) {
  const auto& s = noisy_sequence();
  const auto samples = slice_imu(s.imu, s.scans[10].t, s.scans[11].t);
  for (auto _ : state) benchmark::DoNotOptimize(preintegrate(samples, ImuBias{}, ImuNoiseParams{}));
}
BENCHMARK(BM_Preintegrate);

void BM_RadiusFilter(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  RadarScan scan;
  for (long i = 0; i < state.range(0); ++i) scan.points.push_back({Vec3(u(rng) + 15.0, u(rng), 0.2 * u(rng)), 0.0, 0.0});
  const PreprocessConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(radius_filter(scan, cfg));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RadiusFilter)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_AssociateScans(benchmark::State& state) {
  const auto& s = noisy_sequence();
  const Pose rel = s.ground_truth[20].state().pose().inverse() * s.ground_truth[21].state().pose();
  const Pose rel_radar = s.params.ext.pose().inverse() * rel * s.params.ext.pose();
  const AssocConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(associate_scans(s.scans[20], s.scans[21], rel_radar, cfg));
}
BENCHMARK(BM_AssociateScans);

void BM_ProcessSequence(benchmark::State& state) {
  const auto& s = noisy_sequence();
  const OdometryConfig cfg = config_for(s);
  for (auto _ : state) benchmark::DoNotOptimize(run_odometry(cfg, s.imu, s.scans));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(s.scans.size()));
}
BENCHMARK(BM_ProcessSequence)->Unit(benchmark::kMillisecond)->Iterations(3);

void BM_ProcessScan(benchmark::State& state) {
  const auto& s = noisy_sequence();
  const OdometryConfig cfg = config_for(s);
  const std::size_t warmup = 20;
  for (auto _ : state) {
    state.PauseTiming();
    Odometry odo(cfg);
    std::size_t cursor = 0;
    auto feed = [&](std::size_t k) {
      std::size_t end = cursor;
      while (end < s.imu.size() && s.imu[end].t <= s.scans[k].t) ++end;
      const auto out = odo.process_scan(s.scans[k], std::span(s.imu).subspan(cursor, end - cursor));
      cursor = end;
      return out;
    };
    for (std::size_t k = 0; k < warmup; ++k) feed(k);
    state.ResumeTiming();
    benchmark::DoNotOptimize(feed(warmup));
  }
}
BENCHMARK(BM_ProcessScan)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
