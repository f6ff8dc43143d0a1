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

#include "byzfed/commitment.h"

#include <map>
#include <mutex>
#include <tuple>

#include "byzfed/error.h"

namespace byzfed {

CommitmentKey::CommitmentKey(std::shared_ptr<const SchnorrGroup> group,
                             size_t max_dim, std::string tag)
    : group_(std::move(group)) {
  g_.reserve(max_dim);
  for (size_t c = 0; c < max_dim; ++c) {
    g_.emplace_back(*group_, group_->HashToGenerator(tag + "/g", c));
  }
  h_ = std::make_unique<FixedBaseTable>(*group_, group_->HashToGenerator(tag + "/h", 0));
}

mpz_class CommitmentKey::MultiExp(const FieldVec& v) const {
  if (v.size() > g_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "vector longer than commitment bases");
  }
  mpz_class acc = 1;
  for (size_t c = 0; c < v.size(); ++c) g_[c].MulPowInto(*group_, acc, v[c]);
  return acc;
}

Commitment CommitmentKey::Commit(const FieldVec& v) const {
  return {CommitMode::kDeterministic, MultiExp(v)};
}

Commitment CommitmentKey::Commit(const FieldVec& v, uint64_t r) const {
  mpz_class acc = MultiExp(v);
  h_->MulPowInto(*group_, acc, r);
  return {CommitMode::kPedersen, acc};
}

bool CommitmentKey::Open(const Commitment& c, const FieldVec& v,
                         std::optional<uint64_t> r) const {
  if (r.has_value() != (c.mode == CommitMode::kPedersen)) return false;
  if (v.size() > g_.size()) return false;
  return (r ? Commit(v, *r) : Commit(v)) == c;
}

Commitment CommitmentKey::Add(const Commitment& a, const Commitment& b) const {
  if (a.mode != b.mode) throw Error(ErrorCode::kModeMismatch, "commitment modes differ");
  return {a.mode, group_->Mul(a.value, b.value)};
}

Commitment CommitmentKey::Pow(const Commitment& a, uint64_t e) const {
  return {a.mode, group_->Pow(a.value, e)};
}

void CommitmentKey::Write(ByteWriter& w, const Commitment& c) const {
  w.U8(static_cast<uint8_t>(c.mode));
  group_->WriteElement(w, c.value);
}

Commitment CommitmentKey::Read(ByteReader& r) const {
  uint8_t mode = r.U8();
  if (mode > 1) throw Error(ErrorCode::kDecodeError, "commitment mode");
  return {static_cast<CommitMode>(mode), group_->ReadElement(r)};
}

std::shared_ptr<const CommitmentKey> SharedCommitmentKey(uint64_t q, int modulus_bits,
                                                         size_t dim) {
  static std::mutex mu;
  static std::map<std::tuple<uint64_t, int, size_t>, std::shared_ptr<const CommitmentKey>>
      cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(q, modulus_bits, dim);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto group = std::make_shared<const SchnorrGroup>(
      SchnorrGroup::Generate(q, modulus_bits, Sha256(std::string_view("byzfed/group"))));
  auto ck = std::make_shared<const CommitmentKey>(group, dim);
  cache.emplace(key, ck);
  return ck;
}

VssDealing PedersenDeal(const CommitmentKey& ck, const PrimeField& f,
                        const FieldVec& secret, int n, int t, ChaChaRng& rng,
                        uint64_t dealer, uint64_t round) {
  if (t < 1 || t > n) throw Error(ErrorCode::kBadThreshold, "need 1 <= t <= n");
  SharingPolynomial poly = RandomPolynomial(f, secret, t, rng);
  std::vector<uint64_t> blind(t);
  for (uint64_t& b : blind) b = f.Random(rng);

  VssDealing d;
  for (int m = 0; m < t; ++m) d.commitments.push_back(ck.Commit(poly.coeffs[m], blind[m]));
  for (int j = 1; j <= n; ++j) {
    d.shares.push_back({static_cast<uint32_t>(j), poly.Eval(f, j), dealer, round});
    uint64_t r = 0;
    for (int m = t; m-- > 0;) r = f.Add(f.Mul(r, j), blind[m]);
    d.blindings.push_back(r);
  }
  return d;
}

bool PedersenVerify(const CommitmentKey& ck, const PrimeField& f,
                    std::span<const Commitment> commitments, uint64_t x,
                    const FieldVec& payload, uint64_t blinding) {
  if (commitments.empty() || payload.size() > ck.max_dim()) return false;
  Commitment expect = commitments[0];
  uint64_t xm = 1;
  for (size_t m = 1; m < commitments.size(); ++m) {
    xm = f.Mul(xm, x);
    expect = ck.Add(expect, ck.Pow(commitments[m], xm));
  }
  return ck.Commit(payload, blinding) == expect;
}

std::vector<Commitment> CombineCommitments(const CommitmentKey& ck,
                                           std::span<const Commitment> a,
                                           std::span<const Commitment> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kLengthMismatch, "commitment vectors");
  std::vector<Commitment> out;
  out.reserve(a.size());
  for (size_t i = 0; i < a.size(); ++i) out.push_back(ck.Add(a[i], b[i]));
  return out;
}

}  // namespace byzfed
