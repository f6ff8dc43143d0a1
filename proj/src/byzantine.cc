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

#include "byzfed/byzantine.h"

#include <algorithm>

#include "byzfed/error.h"
#include "byzfed/masking.h"

namespace byzfed {

ByzScript ParseByzScript(const std::string& s) {
  if (s == "halt") return ByzScript::kHalt;
  if (s == "omit") return ByzScript::kOmit;
  if (s == "fabricate") return ByzScript::kFabricate;
  if (s == "tamper") return ByzScript::kTamper;
  if (s == "equivocate") return ByzScript::kEquivocate;
  if (s == "bias" || s == "bias_inclusion") return ByzScript::kBiasInclusion;
  if (s == "collude") return ByzScript::kCollude;
  throw Error(ErrorCode::kConfigError, "unknown byzantine script '" + s + "'");
}

std::string ByzScriptName(ByzScript s) {
  switch (s) {
    case ByzScript::kHalt: return "halt";
    case ByzScript::kOmit: return "omit";
    case ByzScript::kFabricate: return "fabricate";
    case ByzScript::kTamper: return "tamper";
    case ByzScript::kEquivocate: return "equivocate";
    case ByzScript::kBiasInclusion: return "bias_inclusion";
    case ByzScript::kCollude: return "collude";
  }
  return "unknown";
}

ByzantineAggregator::ByzantineAggregator(uint32_t id, std::shared_ptr<const ProtocolContext> ctx,
                                         NodeKeys keys, ByzScript script,
                                         std::shared_ptr<Blackboard> board, ByzOptions opts)
    : inner_(id, ctx, keys),
      ctx_(std::move(ctx)),
      script_(script),
      board_(std::move(board)),
      opts_(opts),
      rng_(DeriveSeed(keys.box.sk, "byzfed/adversary", {id})) {
  board_->members.insert(id);
  if (script_ == ByzScript::kBiasInclusion) {
    inner_.SetInclusionOverride([](uint64_t, std::span<const uint32_t>,
                                   std::span<const uint32_t> candidates, uint32_t rho) {
      return std::vector<uint32_t>(candidates.begin(), candidates.begin() + rho);
    });
  }
}

std::vector<Outgoing> ByzantineAggregator::OnStart() { return Rewrite(inner_.OnStart()); }

std::vector<Outgoing> ByzantineAggregator::OnMessage(uint32_t src,
                                                     std::span<const uint8_t> payload) {
  try {
    Observe(src, Decode(payload, *ctx_->ck));
  } catch (const Error&) {
  }
  std::vector<Outgoing> out = inner_.OnMessage(src, payload);
  if (script_ == ByzScript::kEquivocate) MaybeEquivocate(out);
  return Rewrite(std::move(out));
}

void ByzantineAggregator::Observe(uint32_t src, const Message& m) {
  (void)src;
  if (const auto* ss = std::get_if<SumSharesMsg>(&m)) {
    if (auto reply = inner_.BuildReply(*ss)) {
      board_->shares[{ss->round, ss->coordinator, ss->included}][inner_.id() + 1] =
          reply->summed;
    }
  } else if (const auto* r = std::get_if<IntraReconstructionMsg>(&m)) {
    if (r->coordinator == inner_.id() && !r->declined) {
      board_->shares[{r->round, r->coordinator, r->included}][r->summed.owner] = r->summed;
    }
  }
}

void ByzantineAggregator::MaybeEquivocate(std::vector<Outgoing>& out) {
  const ProtocolParams& p = ctx_->params;
  const PrimeField& f = ctx_->field;
  const uint64_t now = inner_.round();
  for (uint64_t r = now > 0 ? now - 1 : 0; r <= now; ++r) {
    const AggRoundState* st = inner_.round_state(r);
    if (st == nullptr || !st->sum_shares_sent || equivocated_.count(r) != 0) continue;
    // Swap the first included client for any other client whose update we hold.
    std::optional<uint32_t> extra;
    for (const auto& [c, u] : st->updates) {
      if (!std::binary_search(st->included.begin(), st->included.end(), c)) {
        extra = c;
        break;
      }
    }
    if (!extra) continue;
    equivocated_.insert(r);
    Blackboard::Equivocation eq;
    eq.round = r;
    eq.coordinator = inner_.id();
    eq.first = st->included;
    eq.dropped = st->included.front();
    eq.added = *extra;
    eq.second.assign(st->included.begin() + 1, st->included.end());
    eq.second.push_back(*extra);
    std::sort(eq.second.begin(), eq.second.end());
    eq.h_first = st->h_sum;
    eq.h_second = FieldVec(p.dim);
    for (uint32_t c : eq.second) eq.h_second = VecAdd(f, eq.h_second, st->updates.at(c).h);
    for (uint32_t j = 0; j < p.n_a; ++j) {
      SumSharesMsg bundle{r, inner_.id(), eq.second, {}};
      for (uint32_t c : eq.second) bundle.envelopes.push_back(st->updates.at(c).envelopes[j]);
      out.push_back({ctx_->AggNode(j), Encode(bundle, *ctx_->ck)});
    }
    board_->equivocations.push_back(std::move(eq));
  }
}

std::vector<Outgoing> ByzantineAggregator::Rewrite(std::vector<Outgoing> out) {
  const ProtocolParams& p = ctx_->params;
  const uint32_t self = ctx_->AggNode(inner_.id());
  switch (script_) {
    case ByzScript::kHalt:
      if (inner_.round() >= opts_.halt_round) out.clear();
      return out;

    case ByzScript::kOmit: {
      std::vector<Outgoing> kept;
      for (auto& o : out) {
        if (o.dst == self) {
          kept.push_back(std::move(o));
        } else if (!ctx_->IsAggNode(o.dst) && (o.dst - p.n_a) % 2 == 0) {
          kept.push_back(std::move(o));
        }
      }
      return kept;
    }

    case ByzScript::kFabricate: {
      std::vector<Outgoing> extra;
      for (auto& o : out) {
        if (ctx_->IsAggNode(o.dst) || PeekHeader(o.payload).type != MsgType::kTrain) continue;
        const uint64_t round = PeekHeader(o.payload).round;
        std::vector<double> fake(p.dim);
        for (double& v : fake) v = 2.0 * UniformDouble(rng_) - 1.0;
        TrainMsg t{round, ctx_->model_codec.Encode(fake), {}};
        t.cert.digest = ModelDigest(round, t.model);
        t.cert.threshold = p.quorum();
        t.cert.sigs.emplace_back(inner_.id(),
                                 SignDigest(inner_.id(), t.cert.digest, inner_.keys().sign.sk).sig);
        o.payload = Encode(t, *ctx_->ck);
        if (fabricated_.insert(round).second) {
          auto cluster = inner_.round_state(round)->cluster;
          std::vector<double> g(p.dim);
          for (double& v : g) v = 2.0 * UniformDouble(rng_) - 1.0;
          InterClusterSumMsg e{round, inner_.id(),
                               std::vector<uint32_t>(cluster.begin(), cluster.begin() + p.rho),
                               ctx_->codec.Encode(g), {}, {}};
          std::sort(e.included.begin(), e.included.end());
          e.value_sum = ctx_->ck->Commit(e.g_hat);
          e.cert.digest = ClusterDigest(round, inner_.id(), e.included, e.value_sum, *ctx_->ck);
          e.cert.threshold = p.quorum();
          e.cert.sigs.emplace_back(
              inner_.id(), SignDigest(inner_.id(), e.cert.digest, inner_.keys().sign.sk).sig);
          Bytes b = Encode(e, *ctx_->ck);
          for (uint32_t j = 0; j < p.n_a; ++j) {
            if (j != inner_.id()) extra.push_back({ctx_->AggNode(j), b});
          }
        }
      }
      for (auto& e : extra) out.push_back(std::move(e));
      return out;
    }

    case ByzScript::kTamper:
      for (auto& o : out) {
        if (o.dst == self || PeekHeader(o.payload).type != MsgType::kIntraReconstruction) {
          continue;
        }
        auto m = std::get<IntraReconstructionMsg>(Decode(o.payload, *ctx_->ck));
        if (m.declined || m.summed.payload.size() == 0) continue;
        m.summed.payload[0] = ctx_->field.Add(m.summed.payload[0], 1);
        o.payload = Encode(m, *ctx_->ck);
      }
      return out;

    case ByzScript::kEquivocate:
    case ByzScript::kBiasInclusion:
    case ByzScript::kCollude:
      return out;
  }
  return out;
}

namespace {

FieldVec GuessMask(const PrimeField& f, const std::map<uint32_t, Share>* shares,
                   uint32_t threshold, size_t dim, bool* recovered) {
  *recovered = false;
  if (shares == nullptr || shares->empty()) return FieldVec(dim);
  std::vector<Share> list;
  for (const auto& [owner, s] : *shares) list.push_back(s);
  if (list.size() >= threshold) {
    *recovered = true;
    return ShamirRecover(f, list, static_cast<int>(threshold));
  }
  // Below threshold: interpolate anyway; the result is uniformly random.
  return ShamirRecover(f, list, static_cast<int>(list.size()));
}

}  // namespace

std::vector<OracleResult> DifferencingOracle(
    const Blackboard& board, const ProtocolContext& ctx,
    const std::function<FieldVec(uint32_t client, uint64_t round)>& truth) {
  const PrimeField& f = ctx.field;
  std::vector<OracleResult> results;
  auto find = [&](uint64_t r, uint32_t c, const std::vector<uint32_t>& s) {
    auto it = board.shares.find({r, c, s});
    return it == board.shares.end() ? nullptr : &it->second;
  };
  for (const auto& eq : board.equivocations) {
    OracleResult res;
    res.round = eq.round;
    res.target = eq.dropped;
    FieldVec s1 = GuessMask(f, find(eq.round, eq.coordinator, eq.first), ctx.params.quorum(),
                            ctx.params.mask_dim, &res.first_recovered);
    FieldVec s2 = GuessMask(f, find(eq.round, eq.coordinator, eq.second), ctx.params.quorum(),
                            ctx.params.mask_dim, &res.second_recovered);
    FieldVec g1 = UnmaskField(eq.h_first, s1, ctx.A, f);
    FieldVec g2 = UnmaskField(eq.h_second, s2, ctx.A, f);
    res.estimate = VecAdd(f, VecSub(f, g1, g2), truth(eq.added, eq.round));
    results.push_back(std::move(res));
  }
  return results;
}

}  // namespace byzfed
