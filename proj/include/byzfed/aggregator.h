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

// Aggregator state machine: cluster coordination (TRAIN, UPDATE, PING,
// UNIFICATION, inclusion, SUM-SHARES), share service for peers, cluster
// reconstruction, inter-cluster averaging and model certification.

#ifndef BYZFED_AGGREGATOR_H_
#define BYZFED_AGGREGATOR_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "byzfed/messages.h"
#include "byzfed/node.h"
#include "byzfed/protocol_params.h"

namespace byzfed {

struct AggRoundState {
  // Coordinator side.
  bool train_sent = false;
  std::vector<uint32_t> cluster;
  std::map<uint32_t, UpdateMsg> updates;
  std::vector<uint32_t> arrival;  // update arrival order
  PingList pings{0};
  UnificationState unif;
  std::set<uint32_t> unif_from;
  bool prepared = false;
  bool wasted_declared = false;
  bool sum_shares_sent = false;
  std::vector<uint32_t> included;
  FieldVec h_sum;
  Commitment value_sum;
  std::vector<Commitment> mask_commit_sum;
  std::map<uint32_t, IntraReconstructionMsg> valid_replies;
  std::set<uint32_t> replied;
  uint32_t declined = 0;
  uint32_t invalid = 0;
  bool cluster_done = false;

  // Peer side.
  std::set<uint32_t> served;
  std::set<uint32_t> sum_shares_from;
  std::map<uint32_t, WastedMsg> wasted;

  // Inter-cluster and certification.
  std::map<uint32_t, InterClusterSumMsg> entries;
  bool certify_sent = false;
  FieldVec candidate;
  Digest candidate_digest{};
  std::map<uint32_t, SigShare> acks;
  std::set<uint32_t> acked_requesters;
  size_t final_selec = 0;
  bool finalized = false;
};

class Aggregator : public Node {
 public:
  using InclusionFn = std::function<std::vector<uint32_t>(
      uint64_t round, std::span<const uint32_t> counts,
      std::span<const uint32_t> candidates, uint32_t rho)>;

  Aggregator(uint32_t id, std::shared_ptr<const ProtocolContext> ctx, NodeKeys keys);

  // Starts round 0 from the zero model.
  std::vector<Outgoing> OnStart() override;
  std::vector<Outgoing> OnMessage(uint32_t src, std::span<const uint8_t> payload) override;
  // Typed entry point; `src` is the sender's node id.
  std::vector<Outgoing> Handle(uint32_t src, const Message& m);

  uint32_t id() const { return id_; }
  uint64_t round() const { return round_; }
  // True once the model for round `horizon` is certified.
  bool done() const { return done_; }
  uint64_t finalized_rounds() const { return finalized_rounds_; }
  const FieldVec& model_encoded() const { return model_enc_; }
  std::vector<double> model() const { return ctx_->model_codec.Decode(model_enc_); }
  const ThresholdCert& cert() const { return cert_; }
  const AggRoundState* round_state(uint64_t round) const;
  const std::vector<uint32_t>& ledger(uint32_t aggregator) const { return ledger_[aggregator]; }
  const ProtocolContext& context() const { return *ctx_; }
  const NodeKeys& keys() const { return keys_; }

  // State injection for tests and adversary scripts.
  void SetLedger(uint32_t aggregator, std::vector<uint32_t> counts) {
    ledger_[aggregator] = std::move(counts);
  }
  void SetInclusionOverride(InclusionFn fn) { include_override_ = std::move(fn); }
  // Negative control only: serve every bundle, not just the first per
  // coordinator and round.
  void DisableSingleServeForTesting() { single_serve_ = false; }

  // Unseals and sums a bundle addressed to this aggregator without any of
  // the serving guards. nullopt if any envelope fails to open or verify.
  std::optional<IntraReconstructionMsg> BuildReply(const SumSharesMsg& m) const;

  // Whether an INTER-CLUSTER-SUM entry is lawful: rho distinct clients of the
  // coordinator's cluster, a certificate from n_a - t_a aggregators, and a
  // value matching the certified commitment.
  bool VerifyEntry(const InterClusterSumMsg& e) const;

 private:
  struct Out;

  AggRoundState& State(uint64_t round);
  void StartRound(uint64_t round, Out& out);
  void OnUpdate(uint32_t src, const UpdateMsg& m, Out& out);
  void OnPing(uint32_t src, const PingMsg& m, Out& out);
  void OnUnification(uint32_t src, const UnificationMsg& m, Out& out);
  void OnSumShares(uint32_t src, const SumSharesMsg& m, Out& out);
  void OnReply(uint32_t src, const IntraReconstructionMsg& m, Out& out);
  void OnInterClusterSum(uint32_t src, const InterClusterSumMsg& m, Out& out);
  void OnWasted(uint32_t src, const WastedMsg& m, Out& out);
  void OnCertify(uint32_t src, const CertifyMsg& m, Out& out);
  void OnCertifyAck(uint32_t src, const CertifyAckMsg& m, Out& out);

  void TryUnify(uint64_t round, Out& out);
  void TryPrepare(uint64_t round, Out& out);
  void MaybeSendSumShares(uint64_t round, Out& out);
  void DeclareWasted(uint64_t round, bool abort, Out& out);
  void TryRecover(uint64_t round, Out& out);
  void TryCertify(uint64_t round, Out& out);
  // w - gamma * mean of the entries, re-encoded with the model codec.
  FieldVec ComputeCandidate(uint64_t round, const FieldVec& prev,
                            const std::vector<const InterClusterSumMsg*>& entries) const;
  void Prune();
  void Event(uint64_t round, const char* kind, uint32_t peer,
             const std::vector<uint32_t>& ids = {}) const;

  uint32_t id_;
  std::shared_ptr<const ProtocolContext> ctx_;
  NodeKeys keys_;
  uint64_t round_ = 0;
  bool done_ = false;
  uint64_t finalized_rounds_ = 0;
  FieldVec model_enc_;
  ThresholdCert cert_;
  std::vector<std::vector<uint32_t>> ledger_;  // Lambda, one row per aggregator
  std::map<uint64_t, AggRoundState> rounds_;
  InclusionFn include_override_;
  bool single_serve_ = true;
};

}  // namespace byzfed

#endif  // BYZFED_AGGREGATOR_H_
