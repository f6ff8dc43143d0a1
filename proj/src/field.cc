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

#include "byzfed/field.h"

#include <bit>
#include <cmath>
#include <string>

#include "byzfed/error.h"

namespace byzfed {

PrimeField::PrimeField(uint64_t modulus)
    : q_(modulus), mersenne_(modulus == kMersenne61) {
  if (modulus < 3 || modulus >= (uint64_t{1} << 62)) {
    throw Error(ErrorCode::kBadParams, "field modulus out of range");
  }
  int bits = 64 - std::countl_zero(modulus);
  sample_mask_ = bits == 64 ? ~uint64_t{0} : (uint64_t{1} << bits) - 1;
}

uint64_t PrimeField::Pow(uint64_t base, uint64_t exp) const {
  uint64_t result = 1;
  base %= q_;
  while (exp != 0) {
    if (exp & 1) result = Mul(result, base);
    base = Mul(base, base);
    exp >>= 1;
  }
  return result;
}

uint64_t PrimeField::Inv(uint64_t a) const {
  if (a % q_ == 0) throw Error(ErrorCode::kBadParams, "inverse of zero");
  return Pow(a, q_ - 2);
}

uint64_t PrimeField::Random(ChaChaRng& rng) const {
  while (true) {
    uint64_t v = rng() & sample_mask_;
    if (v < q_) return v;
  }
}

namespace {

void CheckSameLength(const FieldVec& a, const FieldVec& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
}

}  // namespace

FieldVec VecAdd(const PrimeField& f, const FieldVec& a, const FieldVec& b) {
  CheckSameLength(a, b);
  FieldVec out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = f.Add(a[i], b[i]);
  return out;
}

FieldVec VecSub(const PrimeField& f, const FieldVec& a, const FieldVec& b) {
  CheckSameLength(a, b);
  FieldVec out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = f.Sub(a[i], b[i]);
  return out;
}

FieldVec VecScale(const PrimeField& f, const FieldVec& a, uint64_t c) {
  FieldVec out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = f.Mul(a[i], c);
  return out;
}

FieldVec RandomVec(const PrimeField& f, size_t n, ChaChaRng& rng) {
  FieldVec out(n);
  for (size_t i = 0; i < n; ++i) out[i] = f.Random(rng);
  return out;
}

void WriteFieldVec(ByteWriter& w, const FieldVec& v) {
  w.U32(static_cast<uint32_t>(v.size()));
  for (uint64_t e : v.elems) w.U64(e);
}

FieldVec ReadFieldVec(ByteReader& r) {
  uint32_t n = r.U32();
  if (n > r.remaining() / 8) throw Error(ErrorCode::kDecodeError, "vector length");
  FieldVec v(n);
  for (uint32_t i = 0; i < n; ++i) v[i] = r.U64();
  return v;
}

FixedPointCodec::FixedPointCodec(PrimeField field, int scale_bits,
                                 double max_magnitude, uint64_t max_summands)
    : field_(field),
      scale_bits_(scale_bits),
      max_magnitude_(max_magnitude),
      max_summands_(max_summands) {
  if (scale_bits < 0 || scale_bits > 52 || !(max_magnitude > 0) ||
      max_summands == 0) {
    throw Error(ErrorCode::kBadParams, "codec parameters");
  }
  long double headroom = static_cast<long double>(max_summands) * max_magnitude *
                         std::ldexp(1.0L, scale_bits);
  if (!(headroom < static_cast<long double>(field.modulus()) / 2)) {
    throw Error(ErrorCode::kBadParams,
                "codec headroom: max_summands * max_magnitude * 2^scale_bits "
                "must stay below q/2");
  }
}

FieldVec FixedPointCodec::Encode(std::span<const double> x) const {
  FieldVec out(x.size());
  const double scale = std::ldexp(1.0, scale_bits_);
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(std::fabs(x[i]) <= max_magnitude_)) {
      throw Error(ErrorCode::kMagnitudeOverflow,
                  "coordinate " + std::to_string(i) + " = " + std::to_string(x[i]));
    }
    int64_t fixed = std::llround(x[i] * scale);
    out[i] = fixed >= 0 ? static_cast<uint64_t>(fixed)
                        : field_.modulus() - static_cast<uint64_t>(-fixed);
  }
  return out;
}

int64_t FixedPointCodec::Centered(uint64_t residue) const {
  const uint64_t q = field_.modulus();
  return residue > q / 2 ? -static_cast<int64_t>(q - residue)
                         : static_cast<int64_t>(residue);
}

std::vector<double> FixedPointCodec::Decode(const FieldVec& v) const {
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    out[i] = std::ldexp(static_cast<double>(Centered(v[i])), -scale_bits_);
  }
  return out;
}

PublicMatrix PublicMatrix::Expand(const Seed& seed, size_t rows, size_t cols,
                                  const PrimeField& field) {
  if (cols == 0 || cols > rows) {
    throw Error(ErrorCode::kDimensionMismatch, "public matrix needs 0 < N_s <= N_g");
  }
  PublicMatrix m;
  m.seed_ = seed;
  m.rows_ = rows;
  m.cols_ = cols;
  ChaChaRng xof(DeriveSeed(seed, "byzfed/public-matrix", {rows, cols}));
  m.entries_.resize(rows * cols);
  for (uint64_t& e : m.entries_) e = field.Random(xof);
  return m;
}

PublicMatrix PublicMatrix::Identity(size_t n) {
  PublicMatrix m;
  m.rows_ = n;
  m.cols_ = n;
  m.entries_.assign(n * n, 0);
  for (size_t i = 0; i < n; ++i) m.entries_[i * n + i] = 1;
  return m;
}

FieldVec PublicMatrix::MatVec(const PrimeField& f, const FieldVec& s) const {
  if (s.size() != cols_) {
    throw Error(ErrorCode::kDimensionMismatch, "mask length != N_s");
  }
  FieldVec out(rows_);
  for (size_t r = 0; r < rows_; ++r) {
    uint64_t acc = 0;
    const uint64_t* row = &entries_[r * cols_];
    for (size_t c = 0; c < cols_; ++c) acc = f.Add(acc, f.Mul(row[c], s[c]));
    out[r] = acc;
  }
  return out;
}

}  // namespace byzfed
