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

// Prime-order subgroup of Z_P^* whose order equals the share field modulus q,
// so exponent arithmetic in commitments is exactly Z_q arithmetic.

#ifndef BYZFED_GROUP_H_
#define BYZFED_GROUP_H_

#include <gmpxx.h>

#include <cstdint>
#include <string_view>
#include <vector>

#include "byzfed/bytes.h"
#include "byzfed/rng.h"

namespace byzfed {

class SchnorrGroup {
 public:
  // Finds P = m*q + 1 prime with P of `modulus_bits` bits, m drawn from the
  // seeded stream. q must be prime.
  static SchnorrGroup Generate(uint64_t q, int modulus_bits, const Seed& seed);

  const mpz_class& modulus() const { return p_; }
  uint64_t order() const { return q_; }
  const mpz_class& cofactor() const { return m_; }
  size_t element_bytes() const { return element_bytes_; }

  mpz_class Mul(const mpz_class& a, const mpz_class& b) const;
  mpz_class Pow(const mpz_class& base, uint64_t exp) const;
  bool IsMember(const mpz_class& x) const;

  // Nothing-up-my-sleeve generator: hash (tag, index) into Z_P, then clear
  // the cofactor.
  mpz_class HashToGenerator(std::string_view tag, uint64_t index) const;

  // Fixed-width big-endian encoding.
  void WriteElement(ByteWriter& w, const mpz_class& x) const;
  mpz_class ReadElement(ByteReader& r) const;

 private:
  mpz_class p_;
  mpz_class m_;
  uint64_t q_ = 0;
  size_t element_bytes_ = 0;
};

// Windowed fixed-base table for exponents below 2^64: 8 windows of 8 bits.
class FixedBaseTable {
 public:
  FixedBaseTable(const SchnorrGroup& g, const mpz_class& base);

  const mpz_class& base() const { return table_[1]; }
  // Multiplies base^exp into acc.
  void MulPowInto(const SchnorrGroup& g, mpz_class& acc, uint64_t exp) const;

 private:
  std::vector<mpz_class> table_;  // [window * 256 + digit]
};

}  // namespace byzfed

#endif  // BYZFED_GROUP_H_
