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

// Share envelopes. Two backends over X25519:
//   kStaticBox  crypto_box with a cached static-static shared key, nonce
//               derived from (context, sender, recipient); fast.
//   kSealedBox  anonymous sealed box with the ephemeral key derived from the
//               sender's secret and the context, so runs stay replayable.
//               Opens with stock crypto_box_seal_open.

#ifndef BYZFED_SEAL_H_
#define BYZFED_SEAL_H_

#include <array>
#include <cstdint>
#include <span>

#include "byzfed/bytes.h"
#include "byzfed/rng.h"

namespace byzfed {

using BoxPublicKey = std::array<uint8_t, 32>;

struct BoxKeyPair {
  BoxPublicKey pk{};
  std::array<uint8_t, 32> sk{};
};

BoxKeyPair BoxKeyFromSeed(const Seed& seed);

enum class SealBackend : uint8_t { kStaticBox = 0, kSealedBox = 1 };

struct SealedEnvelope {
  uint32_t recipient = 0;
  uint64_t sender = 0;
  SealBackend backend = SealBackend::kStaticBox;
  Bytes ciphertext;

  bool operator==(const SealedEnvelope&) const = default;
};

// `context` must be unique per (sender, recipient) envelope, e.g. the round.
SealedEnvelope Seal(SealBackend backend, uint32_t recipient,
                    const BoxPublicKey& recipient_pk, uint64_t sender,
                    const BoxKeyPair& sender_keys, std::span<const uint8_t> payload,
                    std::span<const uint8_t> context);

// Throws kWrongRecipient if the envelope is addressed elsewhere and
// kAuthFailure if decryption fails. `sender_pk` is used by kStaticBox only.
Bytes Unseal(const SealedEnvelope& env, uint32_t self, const BoxKeyPair& self_keys,
             const BoxPublicKey& sender_pk, std::span<const uint8_t> context);

void WriteEnvelope(ByteWriter& w, const SealedEnvelope& e);
SealedEnvelope ReadEnvelope(ByteReader& r);

}  // namespace byzfed

#endif  // BYZFED_SEAL_H_
