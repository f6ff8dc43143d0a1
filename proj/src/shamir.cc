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

#include "byzfed/shamir.h"

#include <algorithm>
#include <string>

#include "byzfed/error.h"

namespace byzfed {

FieldVec SharingPolynomial::Eval(const PrimeField& f, uint64_t x) const {
  // Horner, one coordinate at a time.
  FieldVec out(coeffs.front().size());
  for (size_t m = coeffs.size(); m-- > 0;) {
    for (size_t c = 0; c < out.size(); ++c) {
      out[c] = f.Add(f.Mul(out[c], x), coeffs[m][c]);
    }
  }
  return out;
}

SharingPolynomial RandomPolynomial(const PrimeField& f, const FieldVec& secret,
                                   int t, ChaChaRng& rng) {
  SharingPolynomial p;
  p.coeffs.push_back(secret);
  for (int m = 1; m < t; ++m) p.coeffs.push_back(RandomVec(f, secret.size(), rng));
  return p;
}

std::vector<Share> ShamirShare(const PrimeField& f, const FieldVec& secret, int n,
                               int t, ChaChaRng& rng, uint64_t dealer,
                               uint64_t round) {
  if (t < 1 || t > n) {
    throw Error(ErrorCode::kBadThreshold,
                "need 1 <= t <= n, got t=" + std::to_string(t) + " n=" + std::to_string(n));
  }
  SharingPolynomial p = RandomPolynomial(f, secret, t, rng);
  std::vector<Share> out;
  out.reserve(n);
  for (int j = 1; j <= n; ++j) {
    out.push_back({static_cast<uint32_t>(j), p.Eval(f, j), dealer, round});
  }
  return out;
}

Share ShareAdd(const PrimeField& f, const Share& a, const Share& b) {
  if (a.owner != b.owner || a.round != b.round) {
    throw Error(ErrorCode::kOwnerMismatch, "shares held by different owners or rounds");
  }
  return {a.owner, VecAdd(f, a.payload, b.payload), 0, a.round};
}

std::vector<uint64_t> LagrangeAtZero(const PrimeField& f,
                                     std::span<const uint64_t> xs) {
  std::vector<uint64_t> out(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    uint64_t num = 1, den = 1;
    for (size_t j = 0; j < xs.size(); ++j) {
      if (j == i) continue;
      num = f.Mul(num, xs[j]);
      den = f.Mul(den, f.Sub(xs[j], xs[i]));
    }
    out[i] = f.Mul(num, f.Inv(den));
  }
  return out;
}

FieldVec ShamirRecover(const PrimeField& f, std::span<const Share> shares, int t) {
  if (t < 1) throw Error(ErrorCode::kBadThreshold, "t must be positive");
  if (shares.size() < static_cast<size_t>(t)) {
    throw Error(ErrorCode::kInsufficientShares,
                std::to_string(shares.size()) + " shares, need " + std::to_string(t));
  }
  std::vector<uint64_t> xs;
  for (const Share& s : shares) {
    if (s.owner == 0) throw Error(ErrorCode::kBadParams, "owner index 0");
    if (std::find(xs.begin(), xs.end(), s.owner) != xs.end()) {
      throw Error(ErrorCode::kDuplicateOwner, "owner " + std::to_string(s.owner));
    }
    if (s.round != shares.front().round) {
      throw Error(ErrorCode::kOwnerMismatch, "shares from different rounds");
    }
    if (s.payload.size() != shares.front().payload.size()) {
      throw Error(ErrorCode::kLengthMismatch, "share lengths differ");
    }
    xs.push_back(s.owner);
  }
  std::vector<uint64_t> lambda = LagrangeAtZero(f, xs);
  FieldVec out(shares.front().payload.size());
  for (size_t i = 0; i < shares.size(); ++i) {
    for (size_t c = 0; c < out.size(); ++c) {
      out[c] = f.Add(out[c], f.Mul(lambda[i], shares[i].payload[c]));
    }
  }
  return out;
}

}  // namespace byzfed
