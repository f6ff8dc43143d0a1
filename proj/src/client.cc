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

#include "byzfed/client.h"

#include <algorithm>

#include "byzfed/assignment.h"
#include "byzfed/dp.h"
#include "byzfed/error.h"
#include "byzfed/inclusion.h"
#include "byzfed/masking.h"

namespace byzfed {

MaskedModel CreateMaskedModel(const ProtocolContext& ctx, uint32_t client,
                              const NodeKeys& keys, uint64_t round,
                              std::span<const double> gradient, ChaChaRng& rng) {
  const ProtocolParams& p = ctx.params;
  std::vector<double> noisy = Clip(gradient, p.clip);
  if (p.sigma2 > 0) {
    std::vector<double> e =
        DrawNoise(p.sigma2, p.rho, noisy.size(), rng, p.max_magnitude - p.clip);
    for (size_t i = 0; i < noisy.size(); ++i) noisy[i] += e[i];
  }

  MaskedModel out;
  out.value = ctx.codec.Encode(noisy);
  out.mask = RandomVec(ctx.field, p.mask_dim, rng);
  out.dealing = PedersenDeal(*ctx.ck, ctx.field, out.mask, static_cast<int>(p.n_a),
                             static_cast<int>(p.quorum()), rng, client, round);

  UpdateMsg& u = out.update;
  u.round = round;
  u.client = client;
  u.h = MaskUpdate(noisy, out.mask, ctx.A, ctx.codec);
  u.value_commit = ctx.ck->Commit(out.value);
  u.mask_commits = out.dealing.commitments;

  const Bytes context = SealContext(round, client);
  for (uint32_t j = 0; j < p.n_a; ++j) {
    EnvelopeBody body;
    body.round = round;
    body.client = client;
    body.share = out.dealing.shares[j];
    body.blinding = out.dealing.blindings[j];
    body.value_commit = u.value_commit;
    body.sig = Sign(EnvelopeSigningBytes(body, *ctx.ck), keys.sign.sk);
    u.envelopes.push_back(Seal(p.seal_backend, j, ctx.pki.agg_box[j], client, keys.box,
                               EncodeEnvelopeBody(body, *ctx.ck), context));
  }
  u.sigma_h = Sign(UpdateSigningBytes(u, *ctx.ck), keys.sign.sk);
  u.ping_sig = Sign(PingMessage(round), keys.sign.sk);
  return out;
}

bool VerifyCertificate(const FieldVec& model, const ThresholdCert& cert,
                       std::span<const PublicKey> agg_pks, uint64_t round,
                       uint32_t threshold) {
  const Digest d = ModelDigest(round, model);
  return cert.digest == d && VerifyCombined(cert, d, agg_pks, threshold);
}

Client::Client(uint32_t id, std::shared_ptr<const ProtocolContext> ctx, NodeKeys keys,
               const Seed& secret)
    : id_(id), ctx_(std::move(ctx)), keys_(keys), secret_(secret) {}

std::vector<Outgoing> Client::OnMessage(uint32_t src, std::span<const uint8_t> payload) {
  if (crashed_) return {};
  try {
    Message m = Decode(payload, *ctx_->ck);
    if (auto* t = std::get_if<TrainMsg>(&m)) return OnTrain(src, *t);
  } catch (const Error&) {
    // Malformed traffic is dropped.
  }
  return {};
}

std::vector<Outgoing> Client::OnTrain(uint32_t src, const TrainMsg& msg) {
  const ProtocolParams& p = ctx_->params;
  if (crashed_) return {};
  if (last_round_ && msg.round <= *last_round_) return {};
  if (msg.round >= p.horizon) return {};
  const uint32_t coordinator = Assigned(msg.round, id_, p.n_c, p.n_a, p.public_seed);
  if (src != ctx_->AggNode(coordinator)) return {};
  if (msg.model.size() != p.dim) return {};
  if (msg.round == 0) {
    // Genesis model is the zero vector; no certificate exists yet.
    if (std::any_of(msg.model.elems.begin(), msg.model.elems.end(),
                    [](uint64_t v) { return v != 0; })) {
      return {};
    }
  } else if (!VerifyCertificate(msg.model, msg.cert, ctx_->pki.agg_sign, msg.round,
                                p.quorum())) {
    return {};
  }

  last_round_ = msg.round;
  last_model_ = ctx_->model_codec.Decode(msg.model);
  const std::vector<double> g = LocalGradient(ctx_->tasks->clients.at(id_), last_model_);
  ChaChaRng rng(DeriveSeed(secret_, "byzfed/client-round", {id_, msg.round}));
  MaskedModel mm = CreateMaskedModel(*ctx_, id_, keys_, msg.round, g, rng);
  if (ctx_->observer != nullptr) ctx_->observer->OnClientValue(id_, msg.round, mm.value);

  std::vector<Outgoing> out;
  out.push_back({src, Encode(mm.update, *ctx_->ck)});
  PingMsg ping{msg.round, id_, mm.update.ping_sig};
  const Bytes ping_bytes = Encode(ping, *ctx_->ck);
  for (uint32_t j = 0; j < p.n_a; ++j) out.push_back({ctx_->AggNode(j), ping_bytes});
  return out;
}

}  // namespace byzfed
