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

#include "byzfed/group.h"

#include <string>

#include "byzfed/error.h"

namespace byzfed {
namespace {

mpz_class RandomBits(ChaChaRng& rng, int bits) {
  mpz_class x = 0;
  for (int done = 0; done < bits; done += 64) {
    x <<= 64;
    uint64_t w = rng();
    mpz_class word;
    mpz_import(word.get_mpz_t(), 1, 1, sizeof(w), 0, 0, &w);
    x += word;
  }
  int extra = ((bits + 63) / 64) * 64 - bits;
  if (extra > 0) x >>= extra;
  return x;
}

mpz_class FromU64(uint64_t v) {
  mpz_class x;
  mpz_import(x.get_mpz_t(), 1, 1, sizeof(v), 0, 0, &v);
  return x;
}

}  // namespace

SchnorrGroup SchnorrGroup::Generate(uint64_t q, int modulus_bits, const Seed& seed) {
  mpz_class qz = FromU64(q);
  const int q_bits = static_cast<int>(mpz_sizeinbase(qz.get_mpz_t(), 2));
  if (modulus_bits < q_bits + 8 || mpz_probab_prime_p(qz.get_mpz_t(), 30) == 0) {
    throw Error(ErrorCode::kBadParams, "group order must be prime and well below P");
  }
  ChaChaRng rng(DeriveSeed(seed, "byzfed/group", {q, static_cast<uint64_t>(modulus_bits)}));
  const int m_bits = modulus_bits - q_bits;
  SchnorrGroup g;
  g.q_ = q;
  while (true) {
    mpz_class m = RandomBits(rng, m_bits);
    mpz_setbit(m.get_mpz_t(), m_bits - 1);
    mpz_clrbit(m.get_mpz_t(), 0);
    mpz_class p = m * qz + 1;
    if (static_cast<int>(mpz_sizeinbase(p.get_mpz_t(), 2)) != modulus_bits) continue;
    if (mpz_probab_prime_p(p.get_mpz_t(), 30) == 0) continue;
    g.p_ = p;
    g.m_ = m;
    break;
  }
  g.element_bytes_ = (modulus_bits + 7) / 8;
  return g;
}

mpz_class SchnorrGroup::Mul(const mpz_class& a, const mpz_class& b) const {
  mpz_class r = a * b;
  mpz_mod(r.get_mpz_t(), r.get_mpz_t(), p_.get_mpz_t());
  return r;
}

mpz_class SchnorrGroup::Pow(const mpz_class& base, uint64_t exp) const {
  mpz_class r;
  mpz_class e = FromU64(exp);
  mpz_powm(r.get_mpz_t(), base.get_mpz_t(), e.get_mpz_t(), p_.get_mpz_t());
  return r;
}

bool SchnorrGroup::IsMember(const mpz_class& x) const {
  if (x <= 0 || x >= p_) return false;
  return Pow(x, q_) == 1;
}

mpz_class SchnorrGroup::HashToGenerator(std::string_view tag, uint64_t index) const {
  Seed s = Sha256(tag);
  for (uint64_t attempt = 0;; ++attempt) {
    ChaChaRng rng(DeriveSeed(s, "byzfed/generator", {index, attempt}));
    mpz_class x = RandomBits(rng, static_cast<int>(element_bytes_ * 8) + 64) % p_;
    mpz_class g;
    mpz_powm(g.get_mpz_t(), x.get_mpz_t(), m_.get_mpz_t(), p_.get_mpz_t());
    if (g != 1 && g != 0) return g;
  }
}

void SchnorrGroup::WriteElement(ByteWriter& w, const mpz_class& x) const {
  Bytes out(element_bytes_, 0);
  size_t count = 0;
  size_t len = (mpz_sizeinbase(x.get_mpz_t(), 2) + 7) / 8;
  if (len > element_bytes_) throw Error(ErrorCode::kBadParams, "element too large");
  mpz_export(out.data() + (element_bytes_ - len), &count, 1, 1, 1, 0, x.get_mpz_t());
  w.Raw(out);
}

mpz_class SchnorrGroup::ReadElement(ByteReader& r) const {
  Bytes in = r.Raw(element_bytes_);
  mpz_class x;
  mpz_import(x.get_mpz_t(), in.size(), 1, 1, 1, 0, in.data());
  if (x >= p_) throw Error(ErrorCode::kDecodeError, "group element out of range");
  return x;
}

FixedBaseTable::FixedBaseTable(const SchnorrGroup& g, const mpz_class& base)
    : table_(8 * 256) {
  mpz_class window_base = base;
  for (int w = 0; w < 8; ++w) {
    mpz_class* row = &table_[w * 256];
    row[0] = 1;
    for (int d = 1; d < 256; ++d) row[d] = g.Mul(row[d - 1], window_base);
    window_base = g.Mul(row[255], window_base);
  }
}

void FixedBaseTable::MulPowInto(const SchnorrGroup& g, mpz_class& acc,
                                uint64_t exp) const {
  for (int w = 0; exp != 0; ++w, exp >>= 8) {
    unsigned d = exp & 255;
    if (d != 0) {
      acc *= table_[w * 256 + d];
      mpz_mod(acc.get_mpz_t(), acc.get_mpz_t(), g.modulus().get_mpz_t());
    }
  }
}

}  // namespace byzfed
