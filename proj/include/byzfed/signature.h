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

// Ed25519 signatures and threshold certificates built as counted sets of
// individual signatures over one digest.

#ifndef BYZFED_SIGNATURE_H_
#define BYZFED_SIGNATURE_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "byzfed/bytes.h"
#include "byzfed/rng.h"

namespace byzfed {

using PublicKey = std::array<uint8_t, 32>;
using SecretKey = std::array<uint8_t, 64>;
using Signature = std::array<uint8_t, 64>;

struct SigningKeyPair {
  PublicKey pk{};
  SecretKey sk{};
};

SigningKeyPair SigningKeyFromSeed(const Seed& seed);

Signature Sign(std::span<const uint8_t> msg, const SecretKey& sk);
// Results are memoized process-wide; verification is a pure function of its
// inputs, so the cache cannot change outcomes.
bool Verify(std::span<const uint8_t> msg, const Signature& sig, const PublicKey& pk);

void WriteSignature(ByteWriter& w, const Signature& s);
Signature ReadSignature(ByteReader& r);

// One signer's contribution toward a certificate.
struct SigShare {
  uint32_t signer = 0;
  Digest digest{};
  Signature sig{};
};

struct ThresholdCert {
  Digest digest{};
  std::vector<std::pair<uint32_t, Signature>> sigs;
  uint32_t threshold = 0;

  bool operator==(const ThresholdCert&) const = default;
};

SigShare SignDigest(uint32_t signer, const Digest& d, const SecretKey& sk);

// Keeps the shares over `digest` with valid signatures under pks[signer].
// Throws kDuplicateSigner if one signer appears twice among them and
// kBelowThreshold if fewer than `threshold` survive.
ThresholdCert ThresholdCombine(const Digest& digest, std::span<const SigShare> shares,
                               uint32_t threshold, std::span<const PublicKey> pks);
// As above, targeting the digest most shares agree on (first seen wins ties).
ThresholdCert ThresholdCombine(std::span<const SigShare> shares, uint32_t threshold,
                               std::span<const PublicKey> pks);

// True iff the cert carries >= max(required, cert.threshold) valid signatures
// over `digest` from distinct registered signers.
bool VerifyCombined(const ThresholdCert& cert, const Digest& digest,
                    std::span<const PublicKey> pks, uint32_t required);

void WriteCert(ByteWriter& w, const ThresholdCert& c);
ThresholdCert ReadCert(ByteReader& r);

}  // namespace byzfed

#endif  // BYZFED_SIGNATURE_H_
