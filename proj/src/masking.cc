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

#include "byzfed/masking.h"

#include <cmath>

#include "byzfed/error.h"

namespace byzfed {

FieldVec MaskUpdate(std::span<const double> noisy, const FieldVec& s,
                    const PublicMatrix& A, const FixedPointCodec& codec) {
  if (noisy.size() != A.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "update length != N_g");
  }
  return VecAdd(codec.field(), codec.Encode(noisy), A.MatVec(codec.field(), s));
}

FieldVec UnmaskField(const FieldVec& h_hat, const FieldVec& s_hat, const PublicMatrix& A,
                     const PrimeField& f) {
  return VecSub(f, h_hat, A.MatVec(f, s_hat));
}

bool InDecodeRange(const FieldVec& v, const FixedPointCodec& codec, size_t count) {
  const long double bound = static_cast<long double>(count) * codec.max_magnitude() *
                            std::ldexp(1.0L, codec.scale_bits());
  for (uint64_t r : v.elems) {
    if (std::fabs(static_cast<long double>(codec.Centered(r))) > bound) return false;
  }
  return true;
}

std::vector<double> Unmask(const FieldVec& h_hat, const FieldVec& s_hat,
                           const PublicMatrix& A, const FixedPointCodec& codec,
                           size_t count) {
  FieldVec g = UnmaskField(h_hat, s_hat, A, codec.field());
  if (!InDecodeRange(g, codec, count)) {
    throw Error(ErrorCode::kMagnitudeOverflow,
                "unmasked sum out of range; inclusion sets disagree");
  }
  return codec.Decode(g);
}

}  // namespace byzfed
