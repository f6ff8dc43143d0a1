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

// Client state machine: answer one certified TRAIN per round with a masked,
// shared, committed update and a PING to every aggregator.

#ifndef BYZFED_CLIENT_H_
#define BYZFED_CLIENT_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "byzfed/commitment.h"
#include "byzfed/messages.h"
#include "byzfed/node.h"
#include "byzfed/protocol_params.h"

namespace byzfed {

struct MaskedModel {
  UpdateMsg update;
  FieldVec value;  // encode(clip(g) + e), the committed plaintext
  FieldVec mask;   // s
  VssDealing dealing;
};

// Clips `gradient`, adds N(0, sigma2 / rho) noise, masks with a fresh s,
// deals s to the aggregators and seals one envelope per aggregator.
MaskedModel CreateMaskedModel(const ProtocolContext& ctx, uint32_t client,
                              const NodeKeys& keys, uint64_t round,
                              std::span<const double> gradient, ChaChaRng& rng);

// True iff `cert` carries >= threshold distinct valid aggregator signatures
// over the digest of (round, model).
bool VerifyCertificate(const FieldVec& model, const ThresholdCert& cert,
                       std::span<const PublicKey> agg_pks, uint64_t round,
                       uint32_t threshold);

class Client : public Node {
 public:
  // `secret` seeds the per-round noise and mask streams.
  Client(uint32_t id, std::shared_ptr<const ProtocolContext> ctx, NodeKeys keys,
         const Seed& secret);

  std::vector<Outgoing> OnMessage(uint32_t src, std::span<const uint8_t> payload) override;

  // Direct entry point, also used by tests. `src` is the sender's node id.
  std::vector<Outgoing> OnTrain(uint32_t src, const TrainMsg& msg);

  void Crash() { crashed_ = true; }
  bool crashed() const { return crashed_; }
  uint32_t id() const { return id_; }
  std::optional<uint64_t> last_round() const { return last_round_; }
  const std::vector<double>& last_model() const { return last_model_; }

 private:
  uint32_t id_;
  std::shared_ptr<const ProtocolContext> ctx_;
  NodeKeys keys_;
  Seed secret_;
  std::optional<uint64_t> last_round_;
  std::vector<double> last_model_;
  bool crashed_ = false;
};

}  // namespace byzfed

#endif  // BYZFED_CLIENT_H_
