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

#include "byzfed/aggregator.h"

#include <algorithm>
#include <cmath>

#include "byzfed/assignment.h"
#include "byzfed/client.h"
#include "byzfed/error.h"
#include "byzfed/inclusion.h"
#include "byzfed/masking.h"

namespace byzfed {

struct Aggregator::Out {
  const ProtocolContext& ctx;
  std::vector<Outgoing>& v;

  void Send(uint32_t node, const Message& m) { v.push_back({node, Encode(m, *ctx.ck)}); }
  // Every aggregator, this one included (self-delivery is immediate).
  void ToAggregators(const Message& m) {
    Bytes b = Encode(m, *ctx.ck);
    for (uint32_t j = 0; j < ctx.params.n_a; ++j) v.push_back({ctx.AggNode(j), b});
  }
};

namespace {

bool SortedUnique(std::span<const uint32_t> ids) {
  for (size_t i = 1; i < ids.size(); ++i) {
    if (ids[i - 1] >= ids[i]) return false;
  }
  return true;
}

bool SubsetOf(std::span<const uint32_t> ids, std::span<const uint32_t> cluster) {
  for (uint32_t c : ids) {
    if (std::find(cluster.begin(), cluster.end(), c) == cluster.end()) return false;
  }
  return true;
}

std::vector<uint32_t> AddIncluded(std::vector<uint32_t> counts,
                                  std::span<const uint32_t> included) {
  for (uint32_t c : included) {
    if (c < counts.size()) ++counts[c];
  }
  return counts;
}

}  // namespace

Aggregator::Aggregator(uint32_t id, std::shared_ptr<const ProtocolContext> ctx, NodeKeys keys)
    : id_(id),
      ctx_(std::move(ctx)),
      keys_(keys),
      model_enc_(ctx_->params.dim),
      ledger_(ctx_->params.n_a, std::vector<uint32_t>(ctx_->params.n_c, 0)) {}

AggRoundState& Aggregator::State(uint64_t round) {
  auto it = rounds_.find(round);
  if (it == rounds_.end()) {
    it = rounds_.emplace(round, AggRoundState{}).first;
    it->second.pings = PingList(round);
  }
  return it->second;
}

const AggRoundState* Aggregator::round_state(uint64_t round) const {
  auto it = rounds_.find(round);
  return it == rounds_.end() ? nullptr : &it->second;
}

void Aggregator::Event(uint64_t round, const char* kind, uint32_t peer,
                       const std::vector<uint32_t>& ids) const {
  if (ctx_->observer != nullptr) ctx_->observer->OnEvent(id_, round, kind, peer, ids);
}

std::vector<Outgoing> Aggregator::OnStart() {
  std::vector<Outgoing> v;
  Out out{*ctx_, v};
  StartRound(0, out);
  return v;
}

std::vector<Outgoing> Aggregator::OnMessage(uint32_t src, std::span<const uint8_t> payload) {
  try {
    return Handle(src, Decode(payload, *ctx_->ck));
  } catch (const Error&) {
    return {};  // malformed traffic is dropped
  }
}

std::vector<Outgoing> Aggregator::Handle(uint32_t src, const Message& m) {
  std::vector<Outgoing> v;
  if (RoundOf(m) >= ctx_->params.horizon) return v;
  Out out{*ctx_, v};
  std::visit(
      [&](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, UpdateMsg>) OnUpdate(src, msg, out);
        else if constexpr (std::is_same_v<T, PingMsg>) OnPing(src, msg, out);
        else if constexpr (std::is_same_v<T, UnificationMsg>) OnUnification(src, msg, out);
        else if constexpr (std::is_same_v<T, SumSharesMsg>) OnSumShares(src, msg, out);
        else if constexpr (std::is_same_v<T, IntraReconstructionMsg>) OnReply(src, msg, out);
        else if constexpr (std::is_same_v<T, InterClusterSumMsg>) OnInterClusterSum(src, msg, out);
        else if constexpr (std::is_same_v<T, WastedMsg>) OnWasted(src, msg, out);
        else if constexpr (std::is_same_v<T, CertifyMsg>) OnCertify(src, msg, out);
        else if constexpr (std::is_same_v<T, CertifyAckMsg>) OnCertifyAck(src, msg, out);
        // TRAIN is client-bound; aggregators ignore it.
      },
      m);
  return v;
}

void Aggregator::StartRound(uint64_t round, Out& out) {
  const ProtocolParams& p = ctx_->params;
  round_ = round;
  AggRoundState& st = State(round);
  auto assignment = AssignCached(round, p.n_c, p.n_a, p.public_seed);
  auto cluster = assignment->Cluster(id_);
  st.cluster.assign(cluster.begin(), cluster.end());
  st.train_sent = true;
  TrainMsg train{round, model_enc_, cert_};
  Bytes b = Encode(train, *ctx_->ck);
  for (uint32_t c : st.cluster) out.v.push_back({ctx_->ClientNode(c), b});
  // Peers may already have moved ahead of us.
  TryUnify(round, out);
  TryPrepare(round, out);
  TryCertify(round, out);
}

void Aggregator::OnUpdate(uint32_t src, const UpdateMsg& m, Out& out) {
  const ProtocolParams& p = ctx_->params;
  if (m.client >= p.n_c || src != ctx_->ClientNode(m.client)) return;
  auto it = rounds_.find(m.round);
  if (it == rounds_.end() || !it->second.train_sent) return;
  AggRoundState& st = it->second;
  // Only clients this aggregator sent TRAIN to.
  if (std::find(st.cluster.begin(), st.cluster.end(), m.client) == st.cluster.end()) return;
  if (st.updates.count(m.client) != 0) return;
  if (m.h.size() != p.dim || m.envelopes.size() != p.n_a ||
      m.mask_commits.size() != p.quorum() ||
      m.value_commit.mode != CommitMode::kDeterministic) {
    return;
  }
  for (uint32_t j = 0; j < p.n_a; ++j) {
    if (m.envelopes[j].recipient != j || m.envelopes[j].sender != m.client) return;
  }
  for (const auto& c : m.mask_commits) {
    if (c.mode != CommitMode::kPedersen) return;
  }
  const PublicKey& pk = ctx_->pki.client_sign[m.client];
  if (!Verify(UpdateSigningBytes(m, *ctx_->ck), m.sigma_h, pk)) return;
  try {
    st.pings.Record(m.client, m.ping_sig, ctx_->pki.client_sign);
  } catch (const Error&) {
    return;
  }
  st.updates.emplace(m.client, m);
  st.arrival.push_back(m.client);
  TryUnify(m.round, out);
  TryPrepare(m.round, out);
  MaybeSendSumShares(m.round, out);
}

void Aggregator::OnPing(uint32_t src, const PingMsg& m, Out& out) {
  if (m.client >= ctx_->params.n_c || src != ctx_->ClientNode(m.client)) return;
  AggRoundState& st = State(m.round);
  if (st.pings.Contains(m.client)) return;
  try {
    st.pings.Record(m.client, m.sig, ctx_->pki.client_sign);
  } catch (const Error&) {
    return;
  }
  TryUnify(m.round, out);
  TryPrepare(m.round, out);
}

void Aggregator::TryUnify(uint64_t round, Out& out) {
  AggRoundState& st = State(round);
  auto list = st.unif.MaybeBroadcast(st.pings, ctx_->params.ping_quorum());
  if (list) out.ToAggregators(UnificationMsg{round, id_, std::move(*list)});
}

void Aggregator::OnUnification(uint32_t src, const UnificationMsg& m, Out& out) {
  if (m.sender >= ctx_->params.n_a || src != ctx_->AggNode(m.sender)) return;
  AggRoundState& st = State(m.round);
  if (st.unif_from.count(m.sender) != 0) return;
  if (!st.pings.Merge(m.pings, ctx_->params.ping_quorum(), ctx_->pki.client_sign)) return;
  st.unif_from.insert(m.sender);
  st.unif.RecordValid(m.sender);
  TryUnify(m.round, out);
  TryPrepare(m.round, out);
}

void Aggregator::TryPrepare(uint64_t round, Out& out) {
  const ProtocolParams& p = ctx_->params;
  AggRoundState& st = State(round);
  if (!st.train_sent || st.prepared) return;

  if (p.inclusion == InclusionMode::kFirstArrival) {
    if (st.updates.size() < p.rho) return;
    st.prepared = true;
    st.included.assign(st.arrival.begin(), st.arrival.begin() + p.rho);
    std::sort(st.included.begin(), st.included.end());
    ledger_[id_] = AddIncluded(std::move(ledger_[id_]), st.included);
    MaybeSendSumShares(round, out);
    return;
  }

  if (st.unif.received() < p.quorum()) return;
  std::vector<uint32_t> participants;
  for (uint32_t c : st.cluster) {
    if (st.pings.Contains(c)) participants.push_back(c);
  }
  if (WastedDetection(participants.size(), p.rho, st.unif.received(), p.quorum())) {
    st.prepared = true;
    DeclareWasted(round, false, out);
    return;
  }
  // Every pinged client has already sent its UPDATE, so waiting is safe.
  if (st.updates.size() < p.rho) return;
  st.prepared = true;
  std::sort(participants.begin(), participants.end());
  std::vector<uint32_t> included;
  if (include_override_) {
    included = include_override_(round, ledger_[id_], participants, p.rho);
  } else {
    included = Include(ledger_[id_], participants, p.rho,
                       TieBreakValues(p.public_seed, round, p.n_c));
  }
  std::vector<uint32_t> tmp = AddIncluded(ledger_[id_], included);
  // An overridden (adversarial) inclusion does not police itself.
  if (p.blame_enabled && !include_override_ && Blaming(tmp, p.blame)) {
    Event(round, "self_blame", id_, included);
    DeclareWasted(round, false, out);
    return;
  }
  ledger_[id_] = std::move(tmp);
  st.included = std::move(included);
  MaybeSendSumShares(round, out);
}

void Aggregator::MaybeSendSumShares(uint64_t round, Out& out) {
  const ProtocolParams& p = ctx_->params;
  AggRoundState& st = State(round);
  if (!st.prepared || st.wasted_declared || st.sum_shares_sent || st.included.empty()) return;
  for (uint32_t c : st.included) {
    if (st.updates.count(c) == 0) return;
  }
  st.sum_shares_sent = true;
  st.unif.MarkSumSharesSent();
  Event(round, "included", id_, st.included);

  const PrimeField& f = ctx_->field;
  st.h_sum = FieldVec(p.dim);
  st.value_sum = CommitmentKey::Identity(CommitMode::kDeterministic);
  st.mask_commit_sum.clear();
  for (uint32_t c : st.included) {
    const UpdateMsg& u = st.updates.at(c);
    st.h_sum = VecAdd(f, st.h_sum, u.h);
    st.value_sum = ctx_->ck->Add(st.value_sum, u.value_commit);
    st.mask_commit_sum = st.mask_commit_sum.empty()
                             ? u.mask_commits
                             : CombineCommitments(*ctx_->ck, st.mask_commit_sum, u.mask_commits);
  }
  for (uint32_t j = 0; j < p.n_a; ++j) {
    SumSharesMsg bundle{round, id_, st.included, {}};
    for (uint32_t c : st.included) bundle.envelopes.push_back(st.updates.at(c).envelopes[j]);
    out.Send(ctx_->AggNode(j), bundle);
  }
}

void Aggregator::DeclareWasted(uint64_t round, bool abort, Out& out) {
  AggRoundState& st = State(round);
  if (st.wasted_declared) return;
  st.wasted_declared = true;
  Event(round, abort ? "abort" : "wasted", id_);
  WastedMsg w{round, id_, abort, {}};
  w.sig = Sign(WastedSigningBytes(round, id_, abort), keys_.sign.sk);
  out.ToAggregators(w);
}

std::optional<IntraReconstructionMsg> Aggregator::BuildReply(const SumSharesMsg& m) const {
  const ProtocolParams& p = ctx_->params;
  const PrimeField& f = ctx_->field;
  if (m.envelopes.size() != m.included.size() || m.included.empty()) return std::nullopt;
  IntraReconstructionMsg r;
  r.round = m.round;
  r.coordinator = m.coordinator;
  r.sender = id_;
  r.included = m.included;
  r.value_sum = CommitmentKey::Identity(CommitMode::kDeterministic);
  try {
    for (size_t i = 0; i < m.included.size(); ++i) {
      const uint32_t client = m.included[i];
      if (client >= p.n_c) return std::nullopt;
      Bytes plain = Unseal(m.envelopes[i], id_, keys_.box, ctx_->pki.client_box[client],
                           SealContext(m.round, client));
      EnvelopeBody body = DecodeEnvelopeBody(plain, *ctx_->ck);
      if (body.round != m.round || body.client != client || body.share.owner != id_ + 1 ||
          body.share.round != m.round || body.share.payload.size() != p.mask_dim ||
          body.value_commit.mode != CommitMode::kDeterministic) {
        return std::nullopt;
      }
      if (!Verify(EnvelopeSigningBytes(body, *ctx_->ck), body.sig,
                  ctx_->pki.client_sign[client])) {
        return std::nullopt;
      }
      if (i == 0) {
        r.summed = body.share;
        r.summed.dealer = 0;
        r.blinding_sum = body.blinding;
      } else {
        r.summed = ShareAdd(f, r.summed, body.share);
        r.blinding_sum = f.Add(r.blinding_sum, body.blinding);
      }
      r.value_sum = ctx_->ck->Add(r.value_sum, body.value_commit);
    }
  } catch (const Error&) {
    return std::nullopt;
  }
  r.sig = SignDigest(id_, ClusterDigest(m.round, m.coordinator, m.included, r.value_sum, *ctx_->ck),
                     keys_.sign.sk);
  return r;
}

void Aggregator::OnSumShares(uint32_t src, const SumSharesMsg& m, Out& out) {
  const ProtocolParams& p = ctx_->params;
  if (m.coordinator >= p.n_a || src != ctx_->AggNode(m.coordinator)) return;
  auto assignment = AssignCached(m.round, p.n_c, p.n_a, p.public_seed);
  // Size gate: exactly rho distinct clients of the sender's own cluster.
  if (m.included.size() != p.rho || m.envelopes.size() != p.rho ||
      !SortedUnique(m.included) || !SubsetOf(m.included, assignment->Cluster(m.coordinator))) {
    Event(m.round, "rejected", m.coordinator, m.included);
    return;
  }
  AggRoundState& st = State(m.round);
  if (single_serve_ && st.served.count(m.coordinator) != 0) {
    Event(m.round, "equivocation", m.coordinator, m.included);
    return;
  }
  st.served.insert(m.coordinator);
  st.sum_shares_from.insert(m.coordinator);

  IntraReconstructionMsg decline{m.round, m.coordinator, id_, m.included, true, {}, 0, {}, {}};
  if (st.wasted.count(m.coordinator) != 0) {
    out.Send(src, decline);
    return;
  }
  if (m.coordinator != id_) {
    std::vector<uint32_t> tmp = AddIncluded(ledger_[m.coordinator], m.included);
    if (p.blame_enabled && Blaming(tmp, p.blame)) {
      Event(m.round, "blame", m.coordinator, m.included);
      out.Send(src, decline);
      return;
    }
    ledger_[m.coordinator] = std::move(tmp);
  }
  std::optional<IntraReconstructionMsg> reply = BuildReply(m);
  if (!reply) {
    Event(m.round, "bad_bundle", m.coordinator, m.included);
    out.Send(src, decline);
    return;
  }
  Event(m.round, "served", m.coordinator, m.included);
  out.Send(src, *reply);
}

void Aggregator::OnReply(uint32_t src, const IntraReconstructionMsg& m, Out& out) {
  const ProtocolParams& p = ctx_->params;
  if (m.coordinator != id_ || m.sender >= p.n_a || src != ctx_->AggNode(m.sender)) return;
  auto it = rounds_.find(m.round);
  if (it == rounds_.end()) return;
  AggRoundState& st = it->second;
  if (!st.sum_shares_sent || st.cluster_done || m.included != st.included) return;
  if (!st.replied.insert(m.sender).second) return;

  if (m.declined) {
    ++st.declined;
  } else {
    const Digest d = ClusterDigest(m.round, id_, st.included, st.value_sum, *ctx_->ck);
    bool ok = m.summed.owner == m.sender + 1 && m.summed.round == m.round &&
              m.summed.payload.size() == p.mask_dim && m.value_sum == st.value_sum &&
              m.sig.signer == m.sender && m.sig.digest == d &&
              PedersenVerify(*ctx_->ck, ctx_->field, st.mask_commit_sum, m.summed.owner,
                             m.summed.payload, m.blinding_sum) &&
              Verify(d, m.sig.sig, ctx_->pki.agg_sign[m.sender]);
    if (ok) {
      st.valid_replies.emplace(m.sender, m);
    } else {
      ++st.invalid;
      Event(m.round, "tamper", m.sender);
    }
  }
  TryRecover(m.round, out);
}

void Aggregator::TryRecover(uint64_t round, Out& out) {
  const ProtocolParams& p = ctx_->params;
  AggRoundState& st = State(round);
  if (st.cluster_done) return;
  if (st.valid_replies.size() >= p.quorum()) {
    st.cluster_done = true;
    std::vector<Share> shares;
    std::vector<SigShare> sigs;
    for (const auto& [j, r] : st.valid_replies) {
      shares.push_back(r.summed);
      sigs.push_back(r.sig);
    }
    const PrimeField& f = ctx_->field;
    FieldVec s_hat = ShamirRecover(f, shares, static_cast<int>(p.quorum()));
    FieldVec g_hat = UnmaskField(st.h_sum, s_hat, ctx_->A, f);
    if (!(ctx_->ck->Commit(g_hat) == st.value_sum) ||
        !InDecodeRange(g_hat, ctx_->codec, p.rho)) {
      // Unreachable with Pedersen-checked shares; treat like an abort.
      DeclareWasted(round, true, out);
      return;
    }
    const Digest d = ClusterDigest(round, id_, st.included, st.value_sum, *ctx_->ck);
    InterClusterSumMsg e{round, id_, st.included, std::move(g_hat), st.value_sum,
                         ThresholdCombine(d, sigs, p.quorum(), ctx_->pki.agg_sign)};
    out.ToAggregators(e);
    return;
  }
  // Abort once the remaining silent aggregators cannot lift us to quorum.
  const uint32_t failed = st.declined + st.invalid;
  if (p.n_a - failed < p.quorum()) {
    st.cluster_done = true;
    DeclareWasted(round, true, out);
  }
}

bool Aggregator::VerifyEntry(const InterClusterSumMsg& e) const {
  const ProtocolParams& p = ctx_->params;
  if (e.coordinator >= p.n_a || e.included.size() != p.rho || !SortedUnique(e.included) ||
      e.g_hat.size() != p.dim || e.value_sum.mode != CommitMode::kDeterministic) {
    return false;
  }
  auto assignment = AssignCached(e.round, p.n_c, p.n_a, p.public_seed);
  if (!SubsetOf(e.included, assignment->Cluster(e.coordinator))) return false;
  if (!InDecodeRange(e.g_hat, ctx_->codec, p.rho)) return false;
  const Digest d = ClusterDigest(e.round, e.coordinator, e.included, e.value_sum, *ctx_->ck);
  if (e.cert.digest != d || !VerifyCombined(e.cert, d, ctx_->pki.agg_sign, p.quorum())) {
    return false;
  }
  return ctx_->ck->Commit(e.g_hat) == e.value_sum;
}

void Aggregator::OnInterClusterSum(uint32_t src, const InterClusterSumMsg& m, Out& out) {
  if (m.coordinator >= ctx_->params.n_a || src != ctx_->AggNode(m.coordinator)) return;
  AggRoundState& st = State(m.round);
  if (st.entries.count(m.coordinator) != 0) return;
  if (!VerifyEntry(m)) {
    Event(m.round, "bad_entry", m.coordinator);
    return;
  }
  st.entries.emplace(m.coordinator, m);
  TryCertify(m.round, out);
}

void Aggregator::OnWasted(uint32_t src, const WastedMsg& m, Out& out) {
  if (m.sender >= ctx_->params.n_a || src != ctx_->AggNode(m.sender)) return;
  if (!Verify(WastedSigningBytes(m.round, m.sender, m.abort), m.sig,
              ctx_->pki.agg_sign[m.sender])) {
    return;
  }
  AggRoundState& st = State(m.round);
  if (st.wasted.count(m.sender) != 0) return;
  if (!m.abort && st.sum_shares_from.count(m.sender) != 0) {
    Event(m.round, "flagged", m.sender);
  }
  st.wasted.emplace(m.sender, m);
  TryCertify(m.round, out);
}

FieldVec Aggregator::ComputeCandidate(
    uint64_t round, const FieldVec& prev,
    const std::vector<const InterClusterSumMsg*>& entries) const {
  const ProtocolParams& p = ctx_->params;
  std::vector<double> w = ctx_->model_codec.Decode(prev);
  if (!entries.empty()) {
    std::vector<double> g(p.dim, 0.0);
    for (const InterClusterSumMsg* e : entries) {
      std::vector<double> d = ctx_->codec.Decode(e->g_hat);
      for (size_t i = 0; i < p.dim; ++i) g[i] += d[i];
    }
    const double scale = p.step.At(round) / (static_cast<double>(p.rho) * entries.size());
    for (size_t i = 0; i < p.dim; ++i) {
      w[i] = std::clamp(w[i] - scale * g[i], -p.max_magnitude, p.max_magnitude);
    }
  }
  return ctx_->model_codec.Encode(w);
}

void Aggregator::TryCertify(uint64_t round, Out& out) {
  const ProtocolParams& p = ctx_->params;
  if (round != round_ || done_) return;
  AggRoundState& st = State(round);
  if (!st.train_sent || st.certify_sent) return;
  const size_t wasted = st.wasted.size();
  const size_t need = std::max<size_t>(p.quorum() > wasted ? p.quorum() - wasted : 0, 1);
  CertifyMsg c;
  c.round = round;
  c.requester = id_;
  c.prev_model = model_enc_;
  c.prev_cert = cert_;
  std::vector<const InterClusterSumMsg*> used;
  if (st.entries.size() >= need) {
    for (const auto& [j, e] : st.entries) {
      c.entries.push_back(e);
      used.push_back(&e);
    }
  } else if (st.entries.empty() && wasted >= p.quorum()) {
    for (const auto& [j, w] : st.wasted) c.wasted.push_back(w);
  } else {
    return;
  }
  st.certify_sent = true;
  st.final_selec = used.size();
  st.candidate = ComputeCandidate(round, model_enc_, used);
  st.candidate_digest = ModelDigest(round + 1, st.candidate);
  c.candidate = st.candidate;
  out.ToAggregators(c);
}

void Aggregator::OnCertify(uint32_t src, const CertifyMsg& m, Out& out) {
  const ProtocolParams& p = ctx_->params;
  if (m.requester >= p.n_a || src != ctx_->AggNode(m.requester)) return;
  AggRoundState& st = State(m.round);
  if (st.acked_requesters.count(m.requester) != 0) return;
  if (m.prev_model.size() != p.dim || m.candidate.size() != p.dim) return;

  if (m.round == 0) {
    if (m.prev_model != FieldVec(p.dim)) return;
  } else if (!VerifyCertificate(m.prev_model, m.prev_cert, ctx_->pki.agg_sign, m.round,
                                p.quorum())) {
    return;
  }
  std::vector<const InterClusterSumMsg*> used;
  std::set<uint32_t> coordinators;
  for (const auto& e : m.entries) {
    if (e.round != m.round || !coordinators.insert(e.coordinator).second) return;
    // Entries we already verified on receipt are bit-identical copies.
    auto it = st.entries.find(e.coordinator);
    bool known = it != st.entries.end() && it->second.g_hat == e.g_hat &&
                 it->second.included == e.included && it->second.cert == e.cert &&
                 it->second.value_sum == e.value_sum;
    if (!known && !VerifyEntry(e)) return;
    used.push_back(&e);
  }
  if (m.entries.empty()) {
    std::set<uint32_t> senders;
    for (const auto& w : m.wasted) {
      if (w.round != m.round || w.sender >= p.n_a) return;
      if (!Verify(WastedSigningBytes(w.round, w.sender, w.abort), w.sig,
                  ctx_->pki.agg_sign[w.sender])) {
        return;
      }
      senders.insert(w.sender);
    }
    if (senders.size() < p.quorum()) return;
  }
  if (ComputeCandidate(m.round, m.prev_model, used) != m.candidate) return;
  st.acked_requesters.insert(m.requester);
  CertifyAckMsg ack{m.round, m.requester,
                    SignDigest(id_, ModelDigest(m.round + 1, m.candidate), keys_.sign.sk)};
  out.Send(src, ack);
}

void Aggregator::OnCertifyAck(uint32_t src, const CertifyAckMsg& m, Out& out) {
  const ProtocolParams& p = ctx_->params;
  if (m.requester != id_ || m.sig.signer >= p.n_a || src != ctx_->AggNode(m.sig.signer)) return;
  if (m.round != round_ || done_) return;
  AggRoundState& st = State(m.round);
  if (!st.certify_sent || st.finalized || m.sig.digest != st.candidate_digest) return;
  if (!Verify(m.sig.digest, m.sig.sig, ctx_->pki.agg_sign[m.sig.signer])) return;
  st.acks.emplace(m.sig.signer, m.sig);
  if (st.acks.size() < p.quorum()) return;

  std::vector<SigShare> shares;
  for (const auto& [j, s] : st.acks) shares.push_back(s);
  st.finalized = true;
  model_enc_ = st.candidate;
  cert_ = ThresholdCombine(st.candidate_digest, shares, p.quorum(), ctx_->pki.agg_sign);
  finalized_rounds_ = m.round + 1;
  if (ctx_->observer != nullptr) {
    ctx_->observer->OnFinalize(id_, m.round + 1, model_enc_, cert_, st.final_selec);
  }
  Prune();
  if (m.round + 1 >= p.horizon) {
    done_ = true;
    return;
  }
  StartRound(m.round + 1, out);
}

void Aggregator::Prune() {
  // Bulk payloads of settled old rounds are no longer needed.
  for (auto& [r, st] : rounds_) {
    if (r + 2 >= round_) break;
    if (st.cluster_done || st.wasted_declared) {
      st.updates.clear();
      st.valid_replies.clear();
    }
    st.entries.clear();
  }
}

}  // namespace byzfed
