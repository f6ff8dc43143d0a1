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

// h = encode(g + e) + A*s, and the cluster-level inverse
// g_hat = H_hat - A*s_hat.

#ifndef BYZFED_MASKING_H_
#define BYZFED_MASKING_H_

#include <span>
#include <vector>

#include "byzfed/field.h"

namespace byzfed {

FieldVec MaskUpdate(std::span<const double> noisy, const FieldVec& s,
                    const PublicMatrix& A, const FixedPointCodec& codec);

// Field-level unmasking; no range check.
FieldVec UnmaskField(const FieldVec& h_hat, const FieldVec& s_hat, const PublicMatrix& A,
                     const PrimeField& f);

// Decoded unmasked sum of `count` updates. Throws kMagnitudeOverflow when a
// coordinate falls outside count * max_magnitude, which happens when H_hat
// and s_hat were built from different client sets.
std::vector<double> Unmask(const FieldVec& h_hat, const FieldVec& s_hat,
                           const PublicMatrix& A, const FixedPointCodec& codec,
                           size_t count);

// Whether every coordinate decodes within count * max_magnitude.
bool InDecodeRange(const FieldVec& v, const FixedPointCodec& codec, size_t count);

}  // namespace byzfed

#endif  // BYZFED_MASKING_H_
