/*
 * Copyright 2026 The byzfed Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Experiment runner: INI configuration, named presets, derived parameters
// (blame thresholds, DP noise, crash schedule), metric extraction and the
// message-complexity report.

#ifndef BYZFED_HARNESS_H_
#define BYZFED_HARNESS_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "byzfed/dp.h"
#include "byzfed/inclusion.h"
#include "byzfed/simulator.h"

namespace byzfed {

struct RunConfig {
  SimConfig sim;
  std::string name = "custom";

  // Privacy: epsilon > 0 derives sigma2 from (epsilon, delta); otherwise a
  // non-negative raw_sigma2 is used as is.
  double epsilon = 0;
  double delta = 1e-5;
  double raw_sigma2 = 0;

  // Step size; gamma <= 0 means 1 / L of the task.
  double gamma = 0;
  bool decay = false;

  // Blame thresholds; calibrated by Monte Carlo unless given.
  bool blame_given = false;
  uint32_t calib_trials = 100;
  uint32_t calib_validation_trials = 100;

  // Crash schedule: crash_count clients (lowest ids) crash at evenly spaced
  // times in [crash_start, crash_end]; crash_end < 0 means half the
  // estimated run length.
  uint32_t crash_count = 0;
  double crash_start = 0;
  double crash_end = -1;
};

struct PreparedRun {
  RunConfig cfg;
  DpCalibration dp;      // alpha/sigma2/epsilon_rdp when derived from a target
  uint64_t dp_T = 0;     // inclusion bound used for the noise
  BlameCalibration blame;
  bool blame_calibrated = false;
};

// Built-in presets: smoke, liveness_{halt,omit,fabricate,tamper},
// fairness_debiased, fairness_first_arrival, convergence, oracle,
// complexity, equivocation.
std::vector<std::string> PresetNames();
RunConfig Preset(const std::string& name);

// Reads an INI file (sections run, topology, model, task, train, dp,
// inclusion, delay, faults, output). Keys absent from the file keep the
// values of `base`. Throws kConfigError on unknown keys or bad values.
RunConfig LoadConfig(const std::string& path, const RunConfig& base = RunConfig{});
void SaveConfig(const RunConfig& cfg, const std::string& path);

// Validates, calibrates blame thresholds if needed, derives sigma2, the step
// size, the public seed and the crash schedule.
PreparedRun Prepare(const RunConfig& cfg);

BlameCalibration CalibrateBlameFor(const RunConfig& cfg);

struct RoundMetric {
  uint32_t aggregator = 0;
  uint64_t round = 0;
  double time = 0;
  double distance = 0;
  double objective = 0;
  size_t final_selec = 0;
  bool wasted = false;
  uint32_t blame_events = 0;
};

// Delivered-message counts gathered from the trace tap; self-deliveries
// are excluded.
struct MessageTally {
  std::map<std::tuple<uint64_t, MsgType, Role>, uint64_t> by_round_type_role;
  std::map<std::pair<uint32_t, uint64_t>, uint32_t> per_client_round;
  std::map<std::pair<uint32_t, uint64_t>, uint32_t> per_agg_round;
  uint64_t total = 0;
  uint64_t self = 0;

  void Add(const ProtocolParams& p, const TraceRecord& rec);
};

struct Metrics {
  std::vector<RoundMetric> rounds;
  std::vector<uint32_t> inclusion_counts;  // by client, honest coordinators
  MessageTally messages;
  std::map<std::string, uint64_t> events;
  Digest trace_hash{};
};

Metrics ExtractMetrics(const Simulator& sim, const SimResult& res, MessageTally tally);

struct ExperimentResult {
  PreparedRun prepared;
  SimResult sim;
  Metrics metrics;
  std::vector<std::string> violations;  // invariant failures; empty on success
};

// Runs one experiment. With a non-empty out_dir writes metrics.csv,
// inclusion.csv, messages.csv and summary.json there.
ExperimentResult RunExperiment(const RunConfig& cfg, const std::string& out_dir = "");

struct ComplexitySample {
  uint32_t n_c = 0;
  uint32_t n_a = 0;
  double client_per_round_min = 0;
  double client_per_round_max = 0;
  double agg_per_round_max = 0;   // worst aggregator, worst round
  double agg_per_round_mean = 0;
};

// Per-round message counts by role. Only honest aggregators are measured.
ComplexitySample MeasureComplexity(const ProtocolParams& p, const MessageTally& tally,
                                   const std::vector<uint32_t>& honest);

struct ComplexityReport {
  std::vector<ComplexitySample> samples;
  double c1 = 0;  // per aggregator
  double c2 = 0;  // per cluster member
  bool client_ok = false;     // every client sends n_a + 1 per round
  bool aggregator_ok = false; // every sample within c1 n_a + c2 k
  std::string text;
};

// One point of the complexity sweep: n_c rounded to the nearest multiple of
// n_a, t_a = (n_a - 1) / 3, no faults, no noise, and the smallest rho the
// rho > 1 + sqrt(1 + k) rule admits for the resulting k.
RunConfig ComplexityConfig(const RunConfig& base, uint32_t n_c, uint32_t n_a, uint32_t horizon);

// Fits agg_per_round_max ~ c1 n_a + c2 k by least squares, rounds the
// constants up, and checks every sample against the bound.
ComplexityReport BuildComplexityReport(std::vector<ComplexitySample> samples);

std::string SummaryJson(const ExperimentResult& r);

}  // namespace byzfed

#endif  // BYZFED_HARNESS_H_
