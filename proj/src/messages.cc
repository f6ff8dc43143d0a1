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

#include "byzfed/messages.h"

#include "byzfed/error.h"

namespace byzfed {
namespace {

// Guards against absurd counts before allocating.
uint32_t ReadCount(ByteReader& r, size_t min_elem_bytes) {
  uint32_t n = r.U32();
  if (min_elem_bytes != 0 && n > r.remaining() / min_elem_bytes) {
    throw Error(ErrorCode::kDecodeError, "count exceeds input");
  }
  return n;
}

void WriteIds(ByteWriter& w, std::span<const uint32_t> ids) {
  w.U32(static_cast<uint32_t>(ids.size()));
  for (uint32_t id : ids) w.U32(id);
}

std::vector<uint32_t> ReadIds(ByteReader& r) {
  std::vector<uint32_t> ids(ReadCount(r, 4));
  for (uint32_t& id : ids) id = r.U32();
  return ids;
}

void WriteShare(ByteWriter& w, const Share& s) {
  w.U32(s.owner);
  WriteFieldVec(w, s.payload);
  w.U64(s.dealer).U64(s.round);
}

Share ReadShare(ByteReader& r) {
  Share s;
  s.owner = r.U32();
  s.payload = ReadFieldVec(r);
  s.dealer = r.U64();
  s.round = r.U64();
  return s;
}

void WriteSigShare(ByteWriter& w, const SigShare& s) {
  w.U32(s.signer).Raw(s.digest);
  WriteSignature(w, s.sig);
}

SigShare ReadSigShare(ByteReader& r) {
  SigShare s;
  s.signer = r.U32();
  s.digest = r.Fixed<32>();
  s.sig = ReadSignature(r);
  return s;
}

void WriteEnvelopes(ByteWriter& w, const std::vector<SealedEnvelope>& es) {
  w.U32(static_cast<uint32_t>(es.size()));
  for (const auto& e : es) WriteEnvelope(w, e);
}

std::vector<SealedEnvelope> ReadEnvelopes(ByteReader& r) {
  std::vector<SealedEnvelope> es(ReadCount(r, 8));
  for (auto& e : es) e = ReadEnvelope(r);
  return es;
}

struct BodyWriter {
  const CommitmentKey& ck;
  ByteWriter& w;

  void operator()(const TrainMsg& m) {
    WriteFieldVec(w, m.model);
    WriteCert(w, m.cert);
  }
  void operator()(const UpdateMsg& m) {
    w.U32(m.client);
    WriteFieldVec(w, m.h);
    ck.Write(w, m.value_commit);
    w.U32(static_cast<uint32_t>(m.mask_commits.size()));
    for (const auto& c : m.mask_commits) ck.Write(w, c);
    WriteEnvelopes(w, m.envelopes);
    WriteSignature(w, m.sigma_h);
    WriteSignature(w, m.ping_sig);
  }
  void operator()(const PingMsg& m) {
    w.U32(m.client);
    WriteSignature(w, m.sig);
  }
  void operator()(const UnificationMsg& m) {
    w.U32(m.sender);
    w.U32(static_cast<uint32_t>(m.pings.size()));
    for (const auto& [client, sig] : m.pings) {
      w.U32(client);
      WriteSignature(w, sig);
    }
  }
  void operator()(const SumSharesMsg& m) {
    w.U32(m.coordinator);
    WriteIds(w, m.included);
    WriteEnvelopes(w, m.envelopes);
  }
  void operator()(const IntraReconstructionMsg& m) {
    w.U32(m.coordinator).U32(m.sender);
    WriteIds(w, m.included);
    w.U8(m.declined ? 1 : 0);
    if (m.declined) return;
    WriteShare(w, m.summed);
    w.U64(m.blinding_sum);
    ck.Write(w, m.value_sum);
    WriteSigShare(w, m.sig);
  }
  void operator()(const InterClusterSumMsg& m) {
    w.U32(m.coordinator);
    WriteIds(w, m.included);
    WriteFieldVec(w, m.g_hat);
    ck.Write(w, m.value_sum);
    WriteCert(w, m.cert);
  }
  void operator()(const WastedMsg& m) {
    w.U32(m.sender).U8(m.abort ? 1 : 0);
    WriteSignature(w, m.sig);
  }
  void operator()(const CertifyMsg& m) {
    w.U32(m.requester);
    WriteFieldVec(w, m.prev_model);
    WriteCert(w, m.prev_cert);
    w.U32(static_cast<uint32_t>(m.entries.size()));
    for (const auto& e : m.entries) {
      w.U64(e.round);
      (*this)(e);
    }
    w.U32(static_cast<uint32_t>(m.wasted.size()));
    for (const auto& x : m.wasted) {
      w.U64(x.round);
      (*this)(x);
    }
    WriteFieldVec(w, m.candidate);
  }
  void operator()(const CertifyAckMsg& m) {
    w.U32(m.requester);
    WriteSigShare(w, m.sig);
  }
};

struct BodyReader {
  const CommitmentKey& ck;
  ByteReader& r;

  void Read(TrainMsg& m) {
    m.model = ReadFieldVec(r);
    m.cert = ReadCert(r);
  }
  void Read(UpdateMsg& m) {
    m.client = r.U32();
    m.h = ReadFieldVec(r);
    m.value_commit = ck.Read(r);
    m.mask_commits.resize(ReadCount(r, 1));
    for (auto& c : m.mask_commits) c = ck.Read(r);
    m.envelopes = ReadEnvelopes(r);
    m.sigma_h = ReadSignature(r);
    m.ping_sig = ReadSignature(r);
  }
  void Read(PingMsg& m) {
    m.client = r.U32();
    m.sig = ReadSignature(r);
  }
  void Read(UnificationMsg& m) {
    m.sender = r.U32();
    uint32_t n = ReadCount(r, 68);
    for (uint32_t i = 0; i < n; ++i) {
      uint32_t client = r.U32();
      m.pings[client] = ReadSignature(r);
    }
    if (m.pings.size() != n) throw Error(ErrorCode::kDecodeError, "duplicate ping entry");
  }
  void Read(SumSharesMsg& m) {
    m.coordinator = r.U32();
    m.included = ReadIds(r);
    m.envelopes = ReadEnvelopes(r);
  }
  void Read(IntraReconstructionMsg& m) {
    m.coordinator = r.U32();
    m.sender = r.U32();
    m.included = ReadIds(r);
    m.declined = r.U8() != 0;
    if (m.declined) return;
    m.summed = ReadShare(r);
    m.blinding_sum = r.U64();
    m.value_sum = ck.Read(r);
    m.sig = ReadSigShare(r);
  }
  void Read(InterClusterSumMsg& m) {
    m.coordinator = r.U32();
    m.included = ReadIds(r);
    m.g_hat = ReadFieldVec(r);
    m.value_sum = ck.Read(r);
    m.cert = ReadCert(r);
  }
  void Read(WastedMsg& m) {
    m.sender = r.U32();
    m.abort = r.U8() != 0;
    m.sig = ReadSignature(r);
  }
  void Read(CertifyMsg& m) {
    m.requester = r.U32();
    m.prev_model = ReadFieldVec(r);
    m.prev_cert = ReadCert(r);
    m.entries.resize(ReadCount(r, 8));
    for (auto& e : m.entries) {
      e.round = r.U64();
      Read(e);
    }
    m.wasted.resize(ReadCount(r, 8));
    for (auto& x : m.wasted) {
      x.round = r.U64();
      Read(x);
    }
    m.candidate = ReadFieldVec(r);
  }
  void Read(CertifyAckMsg& m) {
    m.requester = r.U32();
    m.sig = ReadSigShare(r);
  }
};

template <typename T>
Message DecodeAs(ByteReader& body, uint64_t round, const CommitmentKey& ck) {
  T m;
  m.round = round;
  BodyReader{ck, body}.Read(m);
  body.ExpectDone();
  return m;
}

}  // namespace

std::string_view MsgTypeName(MsgType t) {
  switch (t) {
    case MsgType::kTrain: return "TRAIN";
    case MsgType::kUpdate: return "UPDATE";
    case MsgType::kPing: return "PING";
    case MsgType::kUnification: return "UNIFICATION";
    case MsgType::kSumShares: return "SUM-SHARES";
    case MsgType::kIntraReconstruction: return "INTRA-CLUSTER-RECONSTRUCTION";
    case MsgType::kInterClusterSum: return "INTER-CLUSTER-SUM";
    case MsgType::kCertify: return "CERTIFY";
    case MsgType::kCertifyAck: return "CERTIFY-ACK";
    case MsgType::kWasted: return "WASTED";
  }
  return "UNKNOWN";
}

MsgType TypeOf(const Message& m) { return static_cast<MsgType>(m.index() + 1); }

uint64_t RoundOf(const Message& m) {
  return std::visit([](const auto& x) { return x.round; }, m);
}

Bytes Encode(const Message& m, const CommitmentKey& ck) {
  ByteWriter body;
  std::visit(BodyWriter{ck, body}, m);
  ByteWriter w;
  w.U8(kWireVersion).U8(static_cast<uint8_t>(TypeOf(m))).U64(RoundOf(m)).Blob(body.bytes());
  return w.Take();
}

WireHeader PeekHeader(std::span<const uint8_t> wire) {
  ByteReader r(wire);
  WireHeader h;
  h.version = r.U8();
  uint8_t t = r.U8();
  if (t < 1 || t > kNumMsgTypes) throw Error(ErrorCode::kDecodeError, "unknown message type");
  h.type = static_cast<MsgType>(t);
  h.round = r.U64();
  return h;
}

Message Decode(std::span<const uint8_t> wire, const CommitmentKey& ck) {
  WireHeader h = PeekHeader(wire);
  if (h.version != kWireVersion) throw Error(ErrorCode::kDecodeError, "unsupported version");
  ByteReader outer(wire.subspan(10));
  Bytes body_bytes = outer.Blob();
  outer.ExpectDone();
  ByteReader body(body_bytes);
  switch (h.type) {
    case MsgType::kTrain: return DecodeAs<TrainMsg>(body, h.round, ck);
    case MsgType::kUpdate: return DecodeAs<UpdateMsg>(body, h.round, ck);
    case MsgType::kPing: return DecodeAs<PingMsg>(body, h.round, ck);
    case MsgType::kUnification: return DecodeAs<UnificationMsg>(body, h.round, ck);
    case MsgType::kSumShares: return DecodeAs<SumSharesMsg>(body, h.round, ck);
    case MsgType::kIntraReconstruction:
      return DecodeAs<IntraReconstructionMsg>(body, h.round, ck);
    case MsgType::kInterClusterSum: return DecodeAs<InterClusterSumMsg>(body, h.round, ck);
    case MsgType::kCertify: return DecodeAs<CertifyMsg>(body, h.round, ck);
    case MsgType::kCertifyAck: return DecodeAs<CertifyAckMsg>(body, h.round, ck);
    case MsgType::kWasted: return DecodeAs<WastedMsg>(body, h.round, ck);
  }
  throw Error(ErrorCode::kDecodeError, "unknown message type");
}

Bytes EnvelopeSigningBytes(const EnvelopeBody& b, const CommitmentKey& ck) {
  ByteWriter w;
  w.Str("byzfed/envelope").U64(b.round).U32(b.client);
  WriteShare(w, b.share);
  w.U64(b.blinding);
  ck.Write(w, b.value_commit);
  return w.Take();
}

Bytes EncodeEnvelopeBody(const EnvelopeBody& b, const CommitmentKey& ck) {
  ByteWriter w;
  w.U64(b.round).U32(b.client);
  WriteShare(w, b.share);
  w.U64(b.blinding);
  ck.Write(w, b.value_commit);
  WriteSignature(w, b.sig);
  return w.Take();
}

EnvelopeBody DecodeEnvelopeBody(std::span<const uint8_t> data, const CommitmentKey& ck) {
  ByteReader r(data);
  EnvelopeBody b;
  b.round = r.U64();
  b.client = r.U32();
  b.share = ReadShare(r);
  b.blinding = r.U64();
  b.value_commit = ck.Read(r);
  b.sig = ReadSignature(r);
  r.ExpectDone();
  return b;
}

Digest ModelDigest(uint64_t round, const FieldVec& model) {
  ByteWriter w;
  w.Str("byzfed/model").U64(round);
  WriteFieldVec(w, model);
  return Sha256(w.bytes());
}

Digest ClusterDigest(uint64_t round, uint32_t coordinator,
                     std::span<const uint32_t> included, const Commitment& value_sum,
                     const CommitmentKey& ck) {
  ByteWriter w;
  w.Str("byzfed/cluster").U64(round).U32(coordinator);
  WriteIds(w, included);
  ck.Write(w, value_sum);
  return Sha256(w.bytes());
}

Bytes UpdateSigningBytes(const UpdateMsg& u, const CommitmentKey& ck) {
  ByteWriter w;
  w.Str("byzfed/update").U64(u.round).U32(u.client);
  WriteFieldVec(w, u.h);
  ck.Write(w, u.value_commit);
  w.U32(static_cast<uint32_t>(u.mask_commits.size()));
  for (const auto& c : u.mask_commits) ck.Write(w, c);
  return w.Take();
}

Bytes WastedSigningBytes(uint64_t round, uint32_t sender, bool abort) {
  ByteWriter w;
  w.Str("byzfed/wasted").U64(round).U32(sender).U8(abort ? 1 : 0);
  return w.Take();
}

Bytes SealContext(uint64_t round, uint32_t client) {
  ByteWriter w;
  w.Str("byzfed/seal").U64(round).U32(client);
  return w.Take();
}

}  // namespace byzfed
