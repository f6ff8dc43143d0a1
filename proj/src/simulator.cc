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

#include "byzfed/simulator.h"

#include <sodium.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include "byzfed/error.h"

namespace byzfed {

void Recorder::OnClientValue(uint32_t client, uint64_t round, const FieldVec& v) {
  client_values[{client, round}] = v;
}

void Recorder::OnFinalize(uint32_t agg, uint64_t next_round, const FieldVec& model,
                          const ThresholdCert& cert, size_t entries) {
  finalizations.push_back({agg, next_round, now, model_codec.Decode(model), model, cert, entries});
}

void Recorder::OnEvent(uint32_t node, uint64_t round, const char* kind, uint32_t peer,
                       const std::vector<uint32_t>& ids) {
  events.push_back({node, round, kind, peer, ids, now});
}

Simulator::Simulator(SimConfig cfg) : cfg_(std::move(cfg)) {
  const ProtocolParams& p = cfg_.params;
  p.Validate();
  if (cfg_.faults.byzantine.size() > p.t_a) {
    throw Error(ErrorCode::kConfigError, "config violates |byzantine| <= t_a");
  }
  if (cfg_.faults.client_crash_times.size() > p.t_c) {
    throw Error(ErrorCode::kConfigError, "config violates |crashing clients| <= t_c");
  }
  for (const auto& [j, s] : cfg_.faults.byzantine) {
    if (j >= p.n_a) throw Error(ErrorCode::kConfigError, "byzantine id out of range");
  }
  for (const auto& [c, t] : cfg_.faults.client_crash_times) {
    if (c >= p.n_c) throw Error(ErrorCode::kConfigError, "crashing client id out of range");
  }

  const Seed root = SeedFromU64(cfg_.seed);
  const Seed key_root = DeriveSeed(root, "byzfed/keys");
  cfg_.task.n_c = p.n_c;
  cfg_.task.dim = p.dim;
  tasks_ = std::make_shared<TaskSet>(MakeTasks(cfg_.task));
  ctx_ = MakeContext(p, tasks_, key_root);
  ctx_->observer = &recorder_;
  recorder_.model_codec = ctx_->model_codec;
  board_ = std::make_shared<Blackboard>();

  for (uint32_t j = 0; j < p.n_a; ++j) {
    NodeKeys keys = DeriveNodeKeys(key_root, Role::kAggregator, j);
    auto it = cfg_.faults.byzantine.find(j);
    if (it != cfg_.faults.byzantine.end()) {
      auto node = std::make_unique<ByzantineAggregator>(j, ctx_, keys, it->second, board_,
                                                        cfg_.faults.byz_options);
      aggs_.push_back(&node->inner());
      nodes_.push_back(std::move(node));
    } else {
      auto node = std::make_unique<Aggregator>(j, ctx_, keys);
      if (cfg_.faults.disable_single_serve) node->DisableSingleServeForTesting();
      aggs_.push_back(node.get());
      nodes_.push_back(std::move(node));
    }
  }
  for (uint32_t c = 0; c < p.n_c; ++c) {
    nodes_.push_back(std::make_unique<Client>(c, ctx_,
                                              DeriveNodeKeys(key_root, Role::kClient, c),
                                              DeriveSeed(root, "byzfed/client-secret", {c})));
  }
}

const Aggregator& Simulator::aggregator(uint32_t j) const { return *aggs_.at(j); }

uint32_t Simulator::slow_count() const {
  const ProtocolParams& p = cfg_.params;
  int64_t n = cfg_.delays.slow_count >= 0 ? cfg_.delays.slow_count : 2 * int64_t{p.t_c} + 1;
  return static_cast<uint32_t>(std::min<int64_t>(n, p.n_c));
}

double Simulator::EstimatedRoundDuration() const {
  // TRAIN and UPDATE cross a client link; about eight aggregator hops follow.
  const double client = std::max(cfg_.delays.slow_client.mean(), cfg_.delays.fast_client.mean());
  return 2.0 * client + 8.0 * cfg_.delays.aggregator.mean();
}

namespace {

struct Pending {
  uint32_t src;
  uint32_t dst;
  Bytes payload;
};

}  // namespace

SimResult Simulator::Run(bool throw_on_liveness) {
  const ProtocolParams& p = cfg_.params;
  const Seed root = SeedFromU64(cfg_.seed);
  const uint32_t slow_from = p.n_c - slow_count();
  SimResult res;
  for (uint32_t j = 0; j < p.n_a; ++j) {
    if (!is_byzantine(j)) res.honest.push_back(j);
  }

  std::map<std::pair<double, uint64_t>, Pending> queue;
  std::map<std::pair<uint32_t, uint32_t>, ChaChaRng> edge_rng;
  uint64_t next_seq = 0;
  double now = 0;

  auto population = [&](uint32_t src, uint32_t dst) -> GammaParams {
    auto ov = cfg_.delays.overrides.find({src, dst});
    if (ov != cfg_.delays.overrides.end()) return ov->second;
    const uint32_t client_node = ctx_->IsAggNode(src) ? dst : src;
    if (ctx_->IsAggNode(client_node)) return cfg_.delays.aggregator;
    return client_node - p.n_a >= slow_from ? cfg_.delays.slow_client : cfg_.delays.fast_client;
  };

  auto schedule = [&](uint32_t src, std::vector<Outgoing>&& outs) {
    for (Outgoing& o : outs) {
      if (!ctx_->IsAggNode(src)) {
        auto crash = cfg_.faults.client_crash_times.find(src - p.n_a);
        if (crash != cfg_.faults.client_crash_times.end() && now >= crash->second) {
          ++res.dropped_crashed;
          continue;
        }
      }
      double delay = 0;
      if (o.dst != src) {
        auto it = edge_rng.find({src, o.dst});
        if (it == edge_rng.end()) {
          it = edge_rng.emplace(std::make_pair(src, o.dst),
                                ChaChaRng(DeriveSeed(root, "byzfed/edge", {src, o.dst}))).first;
        }
        const GammaParams g = population(src, o.dst);
        delay = std::max(GammaSample(it->second, g.shape, g.scale), 1e-9);
      }
      queue.emplace(std::make_pair(now + delay, next_seq++), Pending{src, o.dst, std::move(o.payload)});
      ++res.sends;
    }
  };

  crypto_hash_sha256_state hash;
  crypto_hash_sha256_init(&hash);
  std::ofstream ndjson;
  if (!cfg_.trace_path.empty()) ndjson.open(cfg_.trace_path);

  for (uint32_t j = 0; j < p.n_a; ++j) schedule(j, nodes_[j]->OnStart());

  const double watchdog = cfg_.watchdog_factor * EstimatedRoundDuration();
  double last_progress = 0;
  size_t seen_finalizations = 0;
  bool all_done = false;
  auto honest_done = [&] {
    return std::all_of(res.honest.begin(), res.honest.end(),
                       [&](uint32_t j) { return aggs_[j]->done(); });
  };
  all_done = honest_done();

  while (!queue.empty()) {
    auto node = queue.extract(queue.begin());
    now = node.key().first;
    const uint64_t seq = node.key().second;
    Pending ev = std::move(node.mapped());
    recorder_.now = now;
    if (!all_done && now - last_progress > watchdog) {
      res.watchdog_tripped = true;
      break;
    }

    TraceRecord rec{now, seq, ev.src, ev.dst, MsgType{}, static_cast<uint32_t>(ev.payload.size()), 0};
    try {
      WireHeader h = PeekHeader(ev.payload);
      rec.type = h.type;
      rec.round = h.round;
    } catch (const Error&) {
    }
    ByteWriter w;
    w.F64(rec.time).U64(rec.seq).U32(rec.src).U32(rec.dst).U8(static_cast<uint8_t>(rec.type))
        .U32(rec.size).U64(rec.round);
    crypto_hash_sha256_update(&hash, w.bytes().data(), w.bytes().size());
    crypto_hash_sha256_update(&hash, ev.payload.data(), ev.payload.size());
    if (ndjson) {
      char line[256];
      std::snprintf(line, sizeof line,
                    "{\"time\":%.9f,\"seq\":%llu,\"src\":%u,\"dst\":%u,\"type\":\"%s\",\"size\":%u,"
                    "\"round\":%llu",
                    rec.time, static_cast<unsigned long long>(rec.seq), rec.src, rec.dst,
                    std::string(MsgTypeName(rec.type)).c_str(), rec.size,
                    static_cast<unsigned long long>(rec.round));
      ndjson << line;
      if (cfg_.dump_payloads) ndjson << ",\"payload\":\"" << Hex(ev.payload) << "\"";
      ndjson << "}\n";
    }
    if (cfg_.keep_trace) res.trace.push_back(rec);
    if (cfg_.tap) cfg_.tap(rec, ev.payload);
    ++res.deliveries;
    if (ev.src != ev.dst) ++res.counts_by_type[static_cast<size_t>(rec.type)];

    schedule(ev.dst, nodes_[ev.dst]->OnMessage(ev.src, ev.payload));

    if (recorder_.finalizations.size() != seen_finalizations) {
      seen_finalizations = recorder_.finalizations.size();
      last_progress = now;
      if (!all_done && honest_done()) {
        all_done = true;
        res.end_time = now;
        if (!cfg_.drain) break;
      }
    }
  }

  crypto_hash_sha256_final(&hash, res.trace_hash.data());
  res.completed = all_done;
  if (!all_done) {
    res.end_time = now;
    res.failure = res.watchdog_tripped ? "watchdog: no honest progress within " +
                                             std::to_string(watchdog) + " s"
                                       : "event queue drained before the horizon";
    if (throw_on_liveness) throw Error(ErrorCode::kLivenessViolation, res.failure);
  }
  return res;
}

}  // namespace byzfed
