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

// Wire messages exchanged by clients and aggregators. Every message is
//   u8 version | u8 type | u64 round | u32 body length | body
// so the simulator can account for traffic without decoding bodies.

#ifndef BYZFED_MESSAGES_H_
#define BYZFED_MESSAGES_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "byzfed/bytes.h"
#include "byzfed/commitment.h"
#include "byzfed/field.h"
#include "byzfed/inclusion.h"
#include "byzfed/seal.h"
#include "byzfed/shamir.h"
#include "byzfed/signature.h"

namespace byzfed {

inline constexpr uint8_t kWireVersion = 1;

enum class MsgType : uint8_t {
  kTrain = 1,
  kUpdate = 2,
  kPing = 3,
  kUnification = 4,
  kSumShares = 5,
  kIntraReconstruction = 6,
  kInterClusterSum = 7,
  kCertify = 8,
  kCertifyAck = 9,
  kWasted = 10,
};
inline constexpr int kNumMsgTypes = 10;

std::string_view MsgTypeName(MsgType t);

struct TrainMsg {
  uint64_t round = 0;
  FieldVec model;  // model-codec encoding of w_round
  ThresholdCert cert;  // empty at round 0
};

// What a client seals for each aggregator.
struct EnvelopeBody {
  uint64_t round = 0;
  uint32_t client = 0;
  Share share;
  uint64_t blinding = 0;  // r(x) of the Pedersen dealing
  Commitment value_commit;  // deterministic commitment to encode(g_bar + e)
  Signature sig{};          // client signature over all of the above
};

struct UpdateMsg {
  uint64_t round = 0;
  uint32_t client = 0;
  FieldVec h;
  Commitment value_commit;
  std::vector<Commitment> mask_commits;  // Pedersen, one per coefficient
  std::vector<SealedEnvelope> envelopes;  // one per aggregator, by index
  Signature sigma_h{};     // over UpdateDigest
  Signature ping_sig{};    // over PingMessage(round)
};

struct PingMsg {
  uint64_t round = 0;
  uint32_t client = 0;
  Signature sig{};
};

struct UnificationMsg {
  uint64_t round = 0;
  uint32_t sender = 0;
  PingEntries pings;
};

struct SumSharesMsg {
  uint64_t round = 0;
  uint32_t coordinator = 0;
  std::vector<uint32_t> included;
  std::vector<SealedEnvelope> envelopes;  // same order as `included`
};

struct IntraReconstructionMsg {
  uint64_t round = 0;
  uint32_t coordinator = 0;
  uint32_t sender = 0;
  std::vector<uint32_t> included;
  bool declined = false;
  Share summed;            // owner = sender + 1
  uint64_t blinding_sum = 0;
  Commitment value_sum;    // product of the included value commitments
  SigShare sig;            // over ClusterDigest
};

struct InterClusterSumMsg {
  uint64_t round = 0;
  uint32_t coordinator = 0;
  std::vector<uint32_t> included;
  FieldVec g_hat;
  Commitment value_sum;
  ThresholdCert cert;  // over ClusterDigest, n_a - t_a signers
};

struct WastedMsg {
  uint64_t round = 0;
  uint32_t sender = 0;
  bool abort = false;  // cluster aborted after SUM-SHARES went out
  Signature sig{};
};

struct CertifyMsg {
  uint64_t round = 0;  // the round being closed; the candidate is for round+1
  uint32_t requester = 0;
  FieldVec prev_model;
  ThresholdCert prev_cert;
  std::vector<InterClusterSumMsg> entries;  // sorted by coordinator
  std::vector<WastedMsg> wasted;            // justifies an empty entry set
  FieldVec candidate;
};

struct CertifyAckMsg {
  uint64_t round = 0;
  uint32_t requester = 0;
  SigShare sig;  // over ModelDigest(round + 1, candidate)
};

using Message = std::variant<TrainMsg, UpdateMsg, PingMsg, UnificationMsg, SumSharesMsg,
                             IntraReconstructionMsg, InterClusterSumMsg, CertifyMsg,
                             CertifyAckMsg, WastedMsg>;

MsgType TypeOf(const Message& m);
uint64_t RoundOf(const Message& m);

// Commitments are fixed-width group elements, so encoding needs the key.
Bytes Encode(const Message& m, const CommitmentKey& ck);
// Throws kDecodeError on malformed input or an unknown version.
Message Decode(std::span<const uint8_t> wire, const CommitmentKey& ck);

struct WireHeader {
  uint8_t version = 0;
  MsgType type{};
  uint64_t round = 0;
};
WireHeader PeekHeader(std::span<const uint8_t> wire);

Bytes EncodeEnvelopeBody(const EnvelopeBody& b, const CommitmentKey& ck);
EnvelopeBody DecodeEnvelopeBody(std::span<const uint8_t> data, const CommitmentKey& ck);

// Signed tuples.
Digest ModelDigest(uint64_t round, const FieldVec& model);
Digest ClusterDigest(uint64_t round, uint32_t coordinator,
                     std::span<const uint32_t> included, const Commitment& value_sum,
                     const CommitmentKey& ck);
Bytes UpdateSigningBytes(const UpdateMsg& u, const CommitmentKey& ck);
Bytes EnvelopeSigningBytes(const EnvelopeBody& b, const CommitmentKey& ck);
Bytes WastedSigningBytes(uint64_t round, uint32_t sender, bool abort);
// Seal context binding an envelope to its round.
Bytes SealContext(uint64_t round, uint32_t client);

}  // namespace byzfed

#endif  // BYZFED_MESSAGES_H_
