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

// Prime-field vectors, the fixed-point bridge from reals into Z_q, and the
// public matrix A used by the masking step h = g + A*s + e.

#ifndef BYZFED_FIELD_H_
#define BYZFED_FIELD_H_

#include <cstdint>
#include <span>
#include <vector>

#include "byzfed/bytes.h"
#include "byzfed/rng.h"

namespace byzfed {

inline constexpr uint64_t kMersenne61 = (uint64_t{1} << 61) - 1;

// Z_q for a prime q < 2^62. The Mersenne prime 2^61 - 1 takes a shift-add
// reduction path; any other modulus falls back to 128-bit remainder.
class PrimeField {
 public:
  explicit PrimeField(uint64_t modulus = kMersenne61);

  uint64_t modulus() const { return q_; }

  uint64_t Add(uint64_t a, uint64_t b) const {
    uint64_t r = a + b;
    return r >= q_ ? r - q_ : r;
  }
  uint64_t Sub(uint64_t a, uint64_t b) const { return a >= b ? a - b : a + q_ - b; }
  uint64_t Neg(uint64_t a) const { return a == 0 ? 0 : q_ - a; }
  uint64_t Mul(uint64_t a, uint64_t b) const {
    unsigned __int128 x = static_cast<unsigned __int128>(a) * b;
    if (mersenne_) {
      uint64_t r = static_cast<uint64_t>(x & q_) + static_cast<uint64_t>(x >> 61);
      r = (r & q_) + (r >> 61);
      return r >= q_ ? r - q_ : r;
    }
    return static_cast<uint64_t>(x % q_);
  }
  uint64_t Pow(uint64_t base, uint64_t exp) const;
  // Requires a != 0.
  uint64_t Inv(uint64_t a) const;
  // Reduces an arbitrary 64-bit value.
  uint64_t Reduce(uint64_t a) const { return a % q_; }
  // Uniform element drawn by rejection from the seeded stream.
  uint64_t Random(ChaChaRng& rng) const;

  bool operator==(const PrimeField&) const = default;

 private:
  uint64_t q_;
  uint64_t sample_mask_;
  bool mersenne_;
};

// A vector of residues in [0, q). The modulus lives with the caller's
// PrimeField; FieldVec itself is plain data.
struct FieldVec {
  std::vector<uint64_t> elems;

  FieldVec() = default;
  explicit FieldVec(size_t n) : elems(n, 0) {}
  explicit FieldVec(std::vector<uint64_t> e) : elems(std::move(e)) {}

  size_t size() const { return elems.size(); }
  uint64_t operator[](size_t i) const { return elems[i]; }
  uint64_t& operator[](size_t i) { return elems[i]; }
  bool operator==(const FieldVec&) const = default;
};

FieldVec VecAdd(const PrimeField& f, const FieldVec& a, const FieldVec& b);
FieldVec VecSub(const PrimeField& f, const FieldVec& a, const FieldVec& b);
FieldVec VecScale(const PrimeField& f, const FieldVec& a, uint64_t c);
FieldVec RandomVec(const PrimeField& f, size_t n, ChaChaRng& rng);

// Little-endian u64 residues with a u32 length prefix.
void WriteFieldVec(ByteWriter& w, const FieldVec& v);
FieldVec ReadFieldVec(ByteReader& r);

// Centered fixed-point encoding: x maps to round(x * 2^scale_bits) mod q,
// so negative reals land in the upper half of Z_q.
class FixedPointCodec {
 public:
  // Throws kBadParams unless max_summands * max_magnitude * 2^scale_bits < q/2.
  FixedPointCodec(PrimeField field, int scale_bits, double max_magnitude,
                  uint64_t max_summands);

  const PrimeField& field() const { return field_; }
  int scale_bits() const { return scale_bits_; }
  double max_magnitude() const { return max_magnitude_; }
  uint64_t max_summands() const { return max_summands_; }
  // Largest per-coordinate rounding error of one encoding.
  double resolution() const { return 1.0 / static_cast<double>(uint64_t{1} << scale_bits_); }

  // Throws kMagnitudeOverflow if any |x_j| > max_magnitude (or is NaN).
  FieldVec Encode(std::span<const double> x) const;
  std::vector<double> Decode(const FieldVec& v) const;
  // Signed integer representative in (-q/2, q/2].
  int64_t Centered(uint64_t residue) const;

 private:
  PrimeField field_;
  int scale_bits_;
  double max_magnitude_;
  uint64_t max_summands_;
};

// Public N_g x N_s matrix expanded from a seed with ChaCha20. Never shipped
// over the wire; every party re-expands it.
class PublicMatrix {
 public:
  // Throws kDimensionMismatch unless 0 < cols <= rows.
  static PublicMatrix Expand(const Seed& seed, size_t rows, size_t cols,
                             const PrimeField& field);
  // Square identity; turns masking into a one-time pad.
  static PublicMatrix Identity(size_t n);

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  const Seed& seed() const { return seed_; }
  uint64_t at(size_t r, size_t c) const { return entries_[r * cols_ + c]; }

  // Throws kDimensionMismatch if s.size() != cols().
  FieldVec MatVec(const PrimeField& f, const FieldVec& s) const;

  bool operator==(const PublicMatrix&) const = default;

 private:
  Seed seed_{};
  size_t rows_ = 0;
  size_t cols_ = 0;
  std::vector<uint64_t> entries_;
};

}  // namespace byzfed

#endif  // BYZFED_FIELD_H_
