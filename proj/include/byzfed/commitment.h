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

// Multi-base commitments over a Schnorr group of order q.
//
//   deterministic:  C(v)    = prod_c g_c^{v_c}
//   Pedersen:       C(v, r) = h^r * prod_c g_c^{v_c}
//
// Both are homomorphic: C(v) * C(v') = C(v + v'). Pedersen VSS commits to
// every coefficient vector of a sharing polynomial so a share can be checked
// against the public commitments without revealing the secret.

#ifndef BYZFED_COMMITMENT_H_
#define BYZFED_COMMITMENT_H_

#include <gmpxx.h>

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "byzfed/field.h"
#include "byzfed/group.h"
#include "byzfed/shamir.h"

namespace byzfed {

enum class CommitMode : uint8_t { kDeterministic = 0, kPedersen = 1 };

struct Commitment {
  CommitMode mode = CommitMode::kDeterministic;
  mpz_class value = 1;

  bool operator==(const Commitment& o) const {
    return mode == o.mode && value == o.value;
  }
};

class CommitmentKey {
 public:
  CommitmentKey(std::shared_ptr<const SchnorrGroup> group, size_t max_dim,
                std::string tag = "byzfed/commit");

  const SchnorrGroup& group() const { return *group_; }
  size_t max_dim() const { return g_.size(); }

  Commitment Commit(const FieldVec& v) const;
  Commitment Commit(const FieldVec& v, uint64_t r) const;
  bool Open(const Commitment& c, const FieldVec& v,
            std::optional<uint64_t> r = std::nullopt) const;

  // Throws kModeMismatch when modes differ.
  Commitment Add(const Commitment& a, const Commitment& b) const;
  Commitment Pow(const Commitment& a, uint64_t e) const;
  static Commitment Identity(CommitMode mode) { return {mode, 1}; }

  void Write(ByteWriter& w, const Commitment& c) const;
  Commitment Read(ByteReader& r) const;

 private:
  mpz_class MultiExp(const FieldVec& v) const;

  std::shared_ptr<const SchnorrGroup> group_;
  std::vector<FixedBaseTable> g_;
  std::unique_ptr<FixedBaseTable> h_;
};

// Process-wide key for (q, modulus_bits, dim); group generation and table
// precomputation happen once.
std::shared_ptr<const CommitmentKey> SharedCommitmentKey(uint64_t q, int modulus_bits,
                                                         size_t dim);

struct VssDealing {
  std::vector<Share> shares;
  std::vector<uint64_t> blindings;         // r(x_j) per share, same order
  std::vector<Commitment> commitments;     // one per coefficient, degree order
};

// Shamir sharing of `secret` with degree t-1 plus Pedersen commitments to
// each coefficient vector under a random blinding polynomial.
VssDealing PedersenDeal(const CommitmentKey& ck, const PrimeField& f,
                        const FieldVec& secret, int n, int t, ChaChaRng& rng,
                        uint64_t dealer = 0, uint64_t round = 0);

// h^blinding * prod g_c^{payload_c} == prod_m C_m^{x^m}.
bool PedersenVerify(const CommitmentKey& ck, const PrimeField& f,
                    std::span<const Commitment> commitments, uint64_t x,
                    const FieldVec& payload, uint64_t blinding);

// Elementwise product, for summing dealings. Throws kLengthMismatch.
std::vector<Commitment> CombineCommitments(const CommitmentKey& ck,
                                           std::span<const Commitment> a,
                                           std::span<const Commitment> b);

}  // namespace byzfed

#endif  // BYZFED_COMMITMENT_H_
