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

#include <gtest/gtest.h>

#include <algorithm>
#include <memory>
#include <vector>

#include "byzfed/assignment.h"
#include "byzfed/client.h"
#include "byzfed/error.h"
#include "byzfed/masking.h"
#include "byzfed/messages.h"
#include "byzfed/protocol_params.h"

namespace byzfed {
namespace {

class ProtocolTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ProtocolParams p;
    p.n_c = 16;
    p.n_a = 4;
    p.t_a = 1;
    p.rho = 2;
    p.dim = 8;
    p.mask_dim = 4;
    p.horizon = 5;
    p.relax_rho_bound = true;
    p.step.gamma0 = 0.5;
    p.public_seed = SeedFromU64(3);
    TaskConfig tc;
    tc.n_c = p.n_c;
    tc.dim = p.dim;
    tasks_ = std::make_shared<TaskSet>(MakeTasks(tc));
    key_root_ = SeedFromU64(99);
    ctx_ = MakeContext(p, tasks_, key_root_);
  }

  const ProtocolParams& params() const { return ctx_->params; }
  NodeKeys AggKeys(uint32_t j) const { return DeriveNodeKeys(key_root_, Role::kAggregator, j); }
  NodeKeys ClientKeys(uint32_t c) const { return DeriveNodeKeys(key_root_, Role::kClient, c); }

  Client MakeClient(uint32_t c) const {
    return Client(c, ctx_, ClientKeys(c), DeriveSeed(key_root_, "test/client", {c}));
  }
  uint32_t CoordinatorNode(uint64_t round, uint32_t c) const {
    return ctx_->AggNode(Assigned(round, c, params().n_c, params().n_a, params().public_seed));
  }

  ThresholdCert CertFor(uint64_t round, const FieldVec& model,
                        const std::vector<uint32_t>& signers) const {
    const Digest d = ModelDigest(round, model);
    std::vector<SigShare> shares;
    for (uint32_t j : signers) shares.push_back(SignDigest(j, d, AggKeys(j).sign.sk));
    return ThresholdCombine(d, shares, static_cast<uint32_t>(signers.size()),
                            ctx_->pki.agg_sign);
  }

  FieldVec SomeModel(double v) const {
    return ctx_->model_codec.Encode(std::vector<double>(params().dim, v));
  }

  MaskedModel Masked(uint32_t c, uint64_t round) const {
    ChaChaRng rng(SeedFromU64(1000 + c));
    std::vector<double> g(params().dim, 0.25);
    return CreateMaskedModel(*ctx_, c, ClientKeys(c), round, g, rng);
  }

  void ExpectRoundTrip(const Message& m) const {
    const Bytes wire = Encode(m, *ctx_->ck);
    const Message back = Decode(wire, *ctx_->ck);
    EXPECT_EQ(TypeOf(back), TypeOf(m));
    EXPECT_EQ(RoundOf(back), RoundOf(m));
    EXPECT_EQ(Encode(back, *ctx_->ck), wire);
    const WireHeader h = PeekHeader(wire);
    EXPECT_EQ(h.version, kWireVersion);
    EXPECT_EQ(h.type, TypeOf(m));
    EXPECT_EQ(h.round, RoundOf(m));
  }

  std::shared_ptr<TaskSet> tasks_;
  Seed key_root_{};
  std::shared_ptr<ProtocolContext> ctx_;
};

TEST_F(ProtocolTest, EveryMessageTypeRoundTrips) {
  const MaskedModel mm = Masked(3, 2);
  const ThresholdCert cert = CertFor(2, SomeModel(0.5), {0, 1, 2});

  ExpectRoundTrip(TrainMsg{2, SomeModel(0.5), cert});
  ExpectRoundTrip(mm.update);
  ExpectRoundTrip(PingMsg{2, 3, mm.update.ping_sig});

  UnificationMsg u{2, 1, {}};
  u.pings[3] = mm.update.ping_sig;
  u.pings[7] = mm.update.ping_sig;
  ExpectRoundTrip(u);

  SumSharesMsg ss{2, 1, {3, 5}, {mm.update.envelopes[0], mm.update.envelopes[1]}};
  ExpectRoundTrip(ss);

  IntraReconstructionMsg r;
  r.round = 2;
  r.coordinator = 1;
  r.sender = 2;
  r.included = {3, 5};
  r.summed = mm.dealing.shares[2];
  r.blinding_sum = 17;
  r.value_sum = mm.update.value_commit;
  r.sig = SignDigest(2, ModelDigest(2, SomeModel(1)), AggKeys(2).sign.sk);
  ExpectRoundTrip(r);
  r.declined = true;
  ExpectRoundTrip(r);

  InterClusterSumMsg e{2, 1, {3, 5}, mm.value, mm.update.value_commit, cert};
  ExpectRoundTrip(e);

  WastedMsg w{2, 3, true, Sign(WastedSigningBytes(2, 3, true), AggKeys(3).sign.sk)};
  ExpectRoundTrip(w);

  CertifyMsg c;
  c.round = 2;
  c.requester = 0;
  c.prev_model = SomeModel(0.5);
  c.prev_cert = cert;
  c.entries = {e};
  c.wasted = {w};
  c.candidate = SomeModel(0.25);
  ExpectRoundTrip(c);

  ExpectRoundTrip(CertifyAckMsg{2, 0, SignDigest(1, ModelDigest(3, c.candidate),
                                                 AggKeys(1).sign.sk)});
}

TEST_F(ProtocolTest, UpdateFieldsSurviveDecode) {
  const MaskedModel mm = Masked(5, 1);
  const Message back = Decode(Encode(mm.update, *ctx_->ck), *ctx_->ck);
  const UpdateMsg& u = std::get<UpdateMsg>(back);
  EXPECT_EQ(u.client, 5u);
  EXPECT_EQ(u.h, mm.update.h);
  EXPECT_EQ(u.value_commit, mm.update.value_commit);
  EXPECT_EQ(u.mask_commits, mm.update.mask_commits);
  EXPECT_EQ(u.envelopes, mm.update.envelopes);
  EXPECT_EQ(u.sigma_h, mm.update.sigma_h);
  EXPECT_EQ(u.ping_sig, mm.update.ping_sig);
}

TEST_F(ProtocolTest, MalformedWireRejected) {
  const Bytes wire = Encode(TrainMsg{1, SomeModel(0.5), CertFor(1, SomeModel(0.5), {0, 1, 2})},
                            *ctx_->ck);
  for (size_t n = 0; n < wire.size(); ++n) {
    try {
      Decode(std::span(wire).first(n), *ctx_->ck);
      ADD_FAILURE() << "prefix " << n << " decoded";
    } catch (const Error& err) {
      EXPECT_EQ(err.code(), ErrorCode::kDecodeError);
    }
  }
  Bytes bad_version = wire;
  bad_version[0] = kWireVersion + 1;
  EXPECT_THROW(Decode(bad_version, *ctx_->ck), Error);
  Bytes bad_type = wire;
  bad_type[1] = 0;
  EXPECT_THROW(Decode(bad_type, *ctx_->ck), Error);
  Bytes trailing = wire;
  trailing.push_back(0);
  EXPECT_THROW(Decode(trailing, *ctx_->ck), Error);
}

TEST_F(ProtocolTest, MaskedUpdateIsConsistent) {
  const MaskedModel mm = Masked(2, 0);
  // Unmasking with the true mask gives back the committed value.
  EXPECT_EQ(UnmaskField(mm.update.h, mm.mask, ctx_->A, ctx_->field), mm.value);
  EXPECT_TRUE(ctx_->ck->Open(mm.update.value_commit, mm.value));
  EXPECT_TRUE(Verify(UpdateSigningBytes(mm.update, *ctx_->ck), mm.update.sigma_h,
                     ctx_->pki.client_sign[2]));
  ASSERT_EQ(mm.update.envelopes.size(), params().n_a);
  for (uint32_t j = 0; j < params().n_a; ++j) {
    const Bytes plain = Unseal(mm.update.envelopes[j], j, AggKeys(j).box,
                               ctx_->pki.client_box[2], SealContext(0, 2));
    const EnvelopeBody body = DecodeEnvelopeBody(plain, *ctx_->ck);
    EXPECT_EQ(body.client, 2u);
    EXPECT_EQ(body.share.owner, j + 1);
    EXPECT_TRUE(PedersenVerify(*ctx_->ck, ctx_->field, mm.update.mask_commits, j + 1,
                               body.share.payload, body.blinding));
    EXPECT_TRUE(Verify(EnvelopeSigningBytes(body, *ctx_->ck), body.sig,
                       ctx_->pki.client_sign[2]));
  }
}

TEST_F(ProtocolTest, NoiselessValueIsClippedGradient) {
  ChaChaRng rng(SeedFromU64(8));
  std::vector<double> g(params().dim, 3.0);  // norm 3 sqrt(8) > clip 1
  const MaskedModel mm = CreateMaskedModel(*ctx_, 0, ClientKeys(0), 0, g, rng);
  const std::vector<double> v = ctx_->codec.Decode(mm.value);
  double norm2 = 0;
  for (double x : v) norm2 += x * x;
  EXPECT_NEAR(std::sqrt(norm2), params().clip, 1e-3);
  for (double x : v) EXPECT_NEAR(x, 1.0 / std::sqrt(8.0), 1e-4);
}

TEST_F(ProtocolTest, ClientAnswersGenesisTrain) {
  const uint32_t c = 6;
  Client client = MakeClient(c);
  const uint32_t coord = CoordinatorNode(0, c);
  const auto out = client.OnTrain(coord, TrainMsg{0, FieldVec(params().dim), {}});
  ASSERT_EQ(out.size(), 1 + params().n_a);
  EXPECT_EQ(out[0].dst, coord);
  EXPECT_EQ(PeekHeader(out[0].payload).type, MsgType::kUpdate);
  std::vector<uint32_t> ping_dsts;
  for (size_t i = 1; i < out.size(); ++i) {
    EXPECT_EQ(PeekHeader(out[i].payload).type, MsgType::kPing);
    ping_dsts.push_back(out[i].dst);
  }
  std::sort(ping_dsts.begin(), ping_dsts.end());
  EXPECT_EQ(ping_dsts, (std::vector<uint32_t>{0, 1, 2, 3}));
  EXPECT_EQ(client.last_round(), 0u);
}

TEST_F(ProtocolTest, ClientRejectsNonZeroGenesis) {
  Client client = MakeClient(1);
  FieldVec m(params().dim);
  m[3] = 1;
  EXPECT_TRUE(client.OnTrain(CoordinatorNode(0, 1), TrainMsg{0, m, {}}).empty());
  EXPECT_FALSE(client.last_round().has_value());
}

TEST_F(ProtocolTest, ClientIgnoresNonCoordinator) {
  const uint32_t c = 4;
  Client client = MakeClient(c);
  const uint32_t coord = CoordinatorNode(0, c);
  for (uint32_t j = 0; j < params().n_a; ++j) {
    if (j == coord) continue;
    EXPECT_TRUE(client.OnTrain(j, TrainMsg{0, FieldVec(params().dim), {}}).empty());
  }
  // Another client's node id is not an aggregator either.
  EXPECT_TRUE(client.OnTrain(ctx_->ClientNode(0), TrainMsg{0, FieldVec(params().dim), {}}).empty());
}

TEST_F(ProtocolTest, ClientRejectsReplayAndStaleRounds) {
  const uint32_t c = 9;
  Client client = MakeClient(c);
  const FieldVec m1 = SomeModel(0.5), m2 = SomeModel(0.25);
  ASSERT_FALSE(client.OnTrain(CoordinatorNode(2, c), TrainMsg{2, m2, CertFor(2, m2, {0, 1, 2})})
                   .empty());
  EXPECT_TRUE(client.OnTrain(CoordinatorNode(2, c), TrainMsg{2, m2, CertFor(2, m2, {0, 1, 2})})
                  .empty());
  EXPECT_TRUE(client.OnTrain(CoordinatorNode(1, c), TrainMsg{1, m1, CertFor(1, m1, {1, 2, 3})})
                  .empty());
  EXPECT_EQ(client.last_round(), 2u);
}

TEST_F(ProtocolTest, ClientChecksCertificate) {
  const uint32_t c = 11;
  const uint64_t round = 1;
  const FieldVec m = SomeModel(0.75);
  const uint32_t coord = CoordinatorNode(round, c);

  // Below threshold.
  EXPECT_TRUE(MakeClient(c).OnTrain(coord, TrainMsg{round, m, CertFor(round, m, {0, 1})}).empty());
  // Certificate for another model.
  EXPECT_TRUE(MakeClient(c)
                  .OnTrain(coord, TrainMsg{round, m, CertFor(round, SomeModel(0.7), {0, 1, 2})})
                  .empty());
  // Certificate for another round.
  EXPECT_TRUE(MakeClient(c).OnTrain(coord, TrainMsg{round, m, CertFor(round + 1, m, {0, 1, 2})})
                  .empty());
  // A signature under a non-aggregator key does not count.
  ThresholdCert forged = CertFor(round, m, {0, 1});
  forged.sigs.push_back({2, Sign(ModelDigest(round, m), ClientKeys(0).sign.sk)});
  EXPECT_TRUE(MakeClient(c).OnTrain(coord, TrainMsg{round, m, forged}).empty());
  // Duplicated signer does not count twice.
  ThresholdCert dup = CertFor(round, m, {0, 1});
  dup.sigs.push_back(dup.sigs.front());
  dup.threshold = 3;
  EXPECT_TRUE(MakeClient(c).OnTrain(coord, TrainMsg{round, m, dup}).empty());

  Client ok = MakeClient(c);
  EXPECT_EQ(ok.OnTrain(coord, TrainMsg{round, m, CertFor(round, m, {1, 2, 3})}).size(),
            1 + params().n_a);
  EXPECT_EQ(ok.last_model(), ctx_->model_codec.Decode(m));
}

TEST_F(ProtocolTest, ClientStopsAtHorizonAndAfterCrash) {
  const uint32_t c = 2;
  const uint64_t h = params().horizon;
  const FieldVec m = SomeModel(0.1);
  EXPECT_TRUE(MakeClient(c).OnTrain(CoordinatorNode(h, c), TrainMsg{h, m, CertFor(h, m, {0, 1, 2})})
                  .empty());
  Client crashed = MakeClient(c);
  crashed.Crash();
  EXPECT_TRUE(crashed.OnTrain(CoordinatorNode(0, c), TrainMsg{0, FieldVec(params().dim), {}})
                  .empty());
}

TEST_F(ProtocolTest, ClientOutputIsDeterministic) {
  const uint32_t c = 7;
  const auto a = MakeClient(c).OnTrain(CoordinatorNode(0, c), TrainMsg{0, FieldVec(params().dim), {}});
  const auto b = MakeClient(c).OnTrain(CoordinatorNode(0, c), TrainMsg{0, FieldVec(params().dim), {}});
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].payload, b[i].payload);
}

}  // namespace
}  // namespace byzfed
