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

// Shamir sharing of FieldVecs over the same field that carries masked
// updates, so share sums and update sums live in one codec domain.

#ifndef BYZFED_SHAMIR_H_
#define BYZFED_SHAMIR_H_

#include <cstdint>
#include <span>
#include <vector>

#include "byzfed/field.h"
#include "byzfed/rng.h"

namespace byzfed {

struct Share {
  uint32_t owner = 0;  // 1-based; also the evaluation point
  FieldVec payload;
  uint64_t dealer = 0;
  uint64_t round = 0;

  bool operator==(const Share&) const = default;
};

// coeffs[m] is the vector of degree-m coefficients; coeffs[0] is the secret.
struct SharingPolynomial {
  std::vector<FieldVec> coeffs;

  FieldVec Eval(const PrimeField& f, uint64_t x) const;
};

// Random polynomial of degree t-1 with the given constant term.
SharingPolynomial RandomPolynomial(const PrimeField& f, const FieldVec& secret,
                                   int t, ChaChaRng& rng);

// Throws kBadThreshold unless 1 <= t <= n.
std::vector<Share> ShamirShare(const PrimeField& f, const FieldVec& secret, int n,
                               int t, ChaChaRng& rng, uint64_t dealer = 0,
                               uint64_t round = 0);

// Pointwise sum. Throws kOwnerMismatch on differing owner or round. The
// result's dealer is 0 (aggregate).
Share ShareAdd(const PrimeField& f, const Share& a, const Share& b);

// Lagrange interpolation at zero over all given shares. Throws
// kInsufficientShares when fewer than t are given, kDuplicateOwner on
// repeated owners, kOwnerMismatch on mixed rounds.
FieldVec ShamirRecover(const PrimeField& f, std::span<const Share> shares, int t);

// Lagrange coefficients at zero for evaluation points xs (distinct, non-zero).
std::vector<uint64_t> LagrangeAtZero(const PrimeField& f,
                                     std::span<const uint64_t> xs);

}  // namespace byzfed

#endif  // BYZFED_SHAMIR_H_
