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

// Deterministic discrete-event simulation of a reliable asynchronous
// network: gamma-distributed per-edge delays, client crashes as send-side
// stops, Byzantine scripts, a liveness watchdog and a hashed trace.

#ifndef BYZFED_SIMULATOR_H_
#define BYZFED_SIMULATOR_H_

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <memory>
#include <string>
#include <vector>

#include "byzfed/aggregator.h"
#include "byzfed/byzantine.h"
#include "byzfed/client.h"
#include "byzfed/learn_task.h"
#include "byzfed/messages.h"
#include "byzfed/protocol_params.h"

namespace byzfed {

struct GammaParams {
  double shape = 2.0;
  double scale = 0.005;  // seconds
  double mean() const { return shape * scale; }
};

struct DelayModel {
  GammaParams aggregator{2.0, 0.005};
  GammaParams fast_client{2.0, 0.020};
  GammaParams slow_client{2.0, 0.200};
  // Size of the slow population (the highest client ids); -1 means 2 t_c + 1.
  int slow_count = -1;
  // Per-(src, dst) node overrides.
  std::map<std::pair<uint32_t, uint32_t>, GammaParams> overrides;
};

struct FaultPlan {
  std::map<uint32_t, double> client_crash_times;  // client id -> seconds
  std::map<uint32_t, ByzScript> byzantine;         // aggregator id -> script
  ByzOptions byz_options;
  // Test-only: honest aggregators serve every bundle.
  bool disable_single_serve = false;
};

struct TraceRecord {
  double time = 0;
  uint64_t seq = 0;
  uint32_t src = 0;
  uint32_t dst = 0;
  MsgType type{};
  uint32_t size = 0;
  uint64_t round = 0;
};

struct SimConfig {
  ProtocolParams params;
  TaskConfig task;
  DelayModel delays;
  FaultPlan faults;
  uint64_t seed = 1;
  double watchdog_factor = 100.0;
  bool keep_trace = false;      // retain records in memory
  std::string trace_path;       // NDJSON output if non-empty
  bool dump_payloads = false;   // hex payloads in the NDJSON
  bool drain = true;            // deliver in-flight messages after the horizon
  // Called on every delivery before the recipient handles it.
  std::function<void(const TraceRecord&, std::span<const uint8_t>)> tap;
};

struct FinalizeRecord {
  uint32_t aggregator = 0;
  uint64_t round = 0;  // the round whose model this is
  double time = 0;
  std::vector<double> model;
  FieldVec model_encoded;
  ThresholdCert cert;
  size_t final_selec = 0;
};

struct EventRecord {
  uint32_t node = 0;
  uint64_t round = 0;
  std::string kind;
  uint32_t peer = 0;
  std::vector<uint32_t> ids;
  double time = 0;
};

// Collects the observer side channel with simulated timestamps.
class Recorder : public ProtocolObserver {
 public:
  void OnClientValue(uint32_t client, uint64_t round, const FieldVec& v) override;
  void OnFinalize(uint32_t agg, uint64_t next_round, const FieldVec& model,
                  const ThresholdCert& cert, size_t entries) override;
  void OnEvent(uint32_t node, uint64_t round, const char* kind, uint32_t peer,
               const std::vector<uint32_t>& ids) override;

  double now = 0;
  FixedPointCodec model_codec{PrimeField(), 32, 1 << 20, 1};
  std::map<std::pair<uint32_t, uint64_t>, FieldVec> client_values;
  std::vector<FinalizeRecord> finalizations;
  std::vector<EventRecord> events;
};

struct SimResult {
  bool completed = false;       // every honest aggregator reached the horizon
  bool watchdog_tripped = false;
  std::string failure;
  double end_time = 0;
  uint64_t sends = 0;           // messages scheduled
  uint64_t deliveries = 0;      // messages dequeued
  uint64_t dropped_crashed = 0; // sends suppressed by crashes
  Digest trace_hash{};
  std::vector<TraceRecord> trace;  // when keep_trace
  // Delivered message counts by type, excluding self-deliveries.
  std::array<uint64_t, kNumMsgTypes + 1> counts_by_type{};
  std::vector<uint32_t> honest;
};

class Simulator {
 public:
  explicit Simulator(SimConfig cfg);

  // Throws Error(kLivenessViolation) when the watchdog trips, unless
  // `throw_on_liveness` is false, in which case the result says so.
  SimResult Run(bool throw_on_liveness = true);

  const ProtocolContext& context() const { return *ctx_; }
  std::shared_ptr<const ProtocolContext> shared_context() const { return ctx_; }
  const TaskSet& tasks() const { return *tasks_; }
  const Recorder& recorder() const { return recorder_; }
  const Blackboard& blackboard() const { return *board_; }
  // The honest (or wrapped) state machine of aggregator j.
  const Aggregator& aggregator(uint32_t j) const;
  bool is_byzantine(uint32_t j) const { return cfg_.faults.byzantine.count(j) != 0; }
  const SimConfig& config() const { return cfg_; }
  uint32_t slow_count() const;
  // Rough honest round duration from the delay means.
  double EstimatedRoundDuration() const;

 private:
  SimConfig cfg_;
  std::shared_ptr<TaskSet> tasks_;
  Recorder recorder_;
  std::shared_ptr<ProtocolContext> ctx_;
  std::shared_ptr<Blackboard> board_;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::vector<Aggregator*> aggs_;
};

}  // namespace byzfed

#endif  // BYZFED_SIMULATOR_H_
