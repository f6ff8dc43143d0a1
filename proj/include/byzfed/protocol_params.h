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

// Protocol-wide parameters, their validation, and the immutable context
// shared by every node of one run (public parameters and the key registry).

#ifndef BYZFED_PROTOCOL_PARAMS_H_
#define BYZFED_PROTOCOL_PARAMS_H_

#include <cstdint>
#include <memory>
#include <vector>

#include "byzfed/commitment.h"
#include "byzfed/field.h"
#include "byzfed/inclusion.h"
#include "byzfed/learn_task.h"
#include "byzfed/rng.h"
#include "byzfed/seal.h"
#include "byzfed/signature.h"

namespace byzfed {

enum class InclusionMode {
  kDebiased,      // wait for the unification quorum, include least-included
  kFirstArrival,  // take the first rho updates (no debiasing)
};

struct ProtocolParams {
  uint32_t n_c = 8;
  uint32_t n_a = 2;
  uint32_t t_c = 0;
  uint32_t t_a = 0;
  uint32_t rho = 2;
  uint32_t dim = 32;       // N_g
  uint32_t mask_dim = 8;   // N_s
  uint32_t horizon = 3;

  uint64_t field_modulus = kMersenne61;
  int scale_bits = 16;
  double max_magnitude = 1 << 20;
  uint64_t max_summands = 1 << 16;
  int model_scale_bits = 32;
  int group_bits = 512;
  SealBackend seal_backend = SealBackend::kStaticBox;

  double clip = 1.0;
  double sigma2 = 0.0;
  StepSchedule step;

  InclusionMode inclusion = InclusionMode::kDebiased;
  bool blame_enabled = true;
  BlameParams blame;

  bool fairness_assertions = false;  // enforce k > 2 rho
  bool relax_rho_bound = false;      // test only: skip rho > 1 + sqrt(1 + k)
  bool allow_weak_resilience = false;  // test only: skip n_a >= 3 t_a + 1

  Seed public_seed{};

  uint32_t k() const { return n_a == 0 ? 0 : n_c / n_a; }
  // Threshold for shares, unifications, cluster and model certificates.
  uint32_t quorum() const { return n_a - t_a; }
  // Pings an aggregator waits for before unifying. Clients of up to t_a
  // silent coordinators never receive TRAIN and so never ping; they are
  // discounted alongside the t_c crashes.
  uint32_t ping_quorum() const;
  size_t inclusion_keep() const { return n_c > 2 * t_c ? n_c - 2 * t_c : n_c; }

  // Throws kConfigError naming the violated rule.
  void Validate() const;
};

struct Pki {
  std::vector<PublicKey> agg_sign;
  std::vector<BoxPublicKey> agg_box;
  std::vector<PublicKey> client_sign;
  std::vector<BoxPublicKey> client_box;
};

struct NodeKeys {
  SigningKeyPair sign;
  BoxKeyPair box;
};

enum class Role : uint8_t { kAggregator = 0, kClient = 1 };

NodeKeys DeriveNodeKeys(const Seed& root, Role role, uint32_t id);

// Side channel for measurement. Protocol logic writes to it but never reads
// from it.
class ProtocolObserver {
 public:
  virtual ~ProtocolObserver() = default;
  // Encoded g_bar + e of a client in a round (the differencing ground truth).
  virtual void OnClientValue(uint32_t /*client*/, uint64_t /*round*/, const FieldVec&) {}
  virtual void OnFinalize(uint32_t /*agg*/, uint64_t /*next_round*/, const FieldVec& /*model*/,
                          const ThresholdCert& /*cert*/, size_t /*entries*/) {}
  // kind: "wasted", "abort", "self_blame", "blame", "tamper", "flagged",
  // "served", "rejected", "equivocation", "bad_bundle", "bad_entry", "included".
  virtual void OnEvent(uint32_t /*node*/, uint64_t /*round*/, const char* /*kind*/,
                       uint32_t /*peer*/, const std::vector<uint32_t>& /*ids*/) {}
};

struct ProtocolContext {
  ProtocolParams params;
  PrimeField field;
  FixedPointCodec codec;
  FixedPointCodec model_codec;
  PublicMatrix A;
  std::shared_ptr<const CommitmentKey> ck;
  Pki pki;
  std::shared_ptr<const TaskSet> tasks;
  ProtocolObserver* observer = nullptr;

  uint32_t AggNode(uint32_t j) const { return j; }
  uint32_t ClientNode(uint32_t c) const { return params.n_a + c; }
  bool IsAggNode(uint32_t node) const { return node < params.n_a; }
  uint32_t NodeCount() const { return params.n_a + params.n_c; }
};

// Validates params, expands A, builds codecs and commitment key, and derives
// every node's public keys from `key_root`.
std::shared_ptr<ProtocolContext> MakeContext(const ProtocolParams& params,
                                             std::shared_ptr<const TaskSet> tasks,
                                             const Seed& key_root);

}  // namespace byzfed

#endif  // BYZFED_PROTOCOL_PARAMS_H_
