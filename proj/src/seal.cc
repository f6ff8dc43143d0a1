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

#include "byzfed/seal.h"

#include <sodium.h>

#include <map>
#include <mutex>

#include "byzfed/error.h"

namespace byzfed {
namespace {

using SharedKey = std::array<uint8_t, crypto_box_BEFORENMBYTES>;

// Both endpoints derive the same key, so the cache is keyed by the
// unordered pair of public keys.
SharedKey StaticSharedKey(const BoxKeyPair& self, const BoxPublicKey& peer) {
  static std::mutex mu;
  static std::map<std::pair<BoxPublicKey, BoxPublicKey>, SharedKey> cache;
  auto key = self.pk < peer ? std::make_pair(self.pk, peer) : std::make_pair(peer, self.pk);
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  SharedKey k;
  if (crypto_box_beforenm(k.data(), peer.data(), self.sk.data()) != 0) {
    throw Error(ErrorCode::kAuthFailure, "degenerate peer key");
  }
  if (cache.size() > (1 << 16)) cache.clear();
  cache.emplace(key, k);
  return k;
}

std::array<uint8_t, crypto_box_NONCEBYTES> StaticNonce(std::span<const uint8_t> context,
                                                       uint64_t sender, uint32_t recipient) {
  ByteWriter w;
  w.Str("byzfed/seal-nonce").Blob(context).U64(sender).U32(recipient);
  std::array<uint8_t, crypto_box_NONCEBYTES> n;
  crypto_generichash(n.data(), n.size(), w.bytes().data(), w.bytes().size(), nullptr, 0);
  return n;
}

}  // namespace

BoxKeyPair BoxKeyFromSeed(const Seed& seed) {
  if (sodium_init() < 0) throw Error(ErrorCode::kBadParams, "libsodium init failed");
  BoxKeyPair kp;
  crypto_box_seed_keypair(kp.pk.data(), kp.sk.data(), seed.data());
  return kp;
}

SealedEnvelope Seal(SealBackend backend, uint32_t recipient,
                    const BoxPublicKey& recipient_pk, uint64_t sender,
                    const BoxKeyPair& sender_keys, std::span<const uint8_t> payload,
                    std::span<const uint8_t> context) {
  SealedEnvelope env;
  env.recipient = recipient;
  env.sender = sender;
  env.backend = backend;
  if (backend == SealBackend::kStaticBox) {
    SharedKey k = StaticSharedKey(sender_keys, recipient_pk);
    auto nonce = StaticNonce(context, sender, recipient);
    env.ciphertext.resize(payload.size() + crypto_box_MACBYTES);
    crypto_box_easy_afternm(env.ciphertext.data(), payload.data(), payload.size(),
                            nonce.data(), k.data());
    return env;
  }
  // Ephemeral key bound to the sender's secret, the context and the recipient.
  ByteWriter w;
  w.Str("byzfed/seal-ephemeral").Blob(context).U32(recipient);
  Seed eseed;
  crypto_generichash(eseed.data(), eseed.size(), w.bytes().data(), w.bytes().size(),
                     sender_keys.sk.data(), sender_keys.sk.size());
  BoxKeyPair eph = BoxKeyFromSeed(eseed);
  std::array<uint8_t, crypto_box_NONCEBYTES> nonce;
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, nonce.size());
  crypto_generichash_update(&st, eph.pk.data(), eph.pk.size());
  crypto_generichash_update(&st, recipient_pk.data(), recipient_pk.size());
  crypto_generichash_final(&st, nonce.data(), nonce.size());
  env.ciphertext.resize(crypto_box_SEALBYTES + payload.size());
  std::copy(eph.pk.begin(), eph.pk.end(), env.ciphertext.begin());
  if (crypto_box_easy(env.ciphertext.data() + eph.pk.size(), payload.data(),
                      payload.size(), nonce.data(), recipient_pk.data(),
                      eph.sk.data()) != 0) {
    throw Error(ErrorCode::kAuthFailure, "sealing failed");
  }
  sodium_memzero(eph.sk.data(), eph.sk.size());
  return env;
}

Bytes Unseal(const SealedEnvelope& env, uint32_t self, const BoxKeyPair& self_keys,
             const BoxPublicKey& sender_pk, std::span<const uint8_t> context) {
  if (env.recipient != self) {
    throw Error(ErrorCode::kWrongRecipient, "envelope addressed to " +
                                                std::to_string(env.recipient));
  }
  if (env.backend == SealBackend::kStaticBox) {
    if (env.ciphertext.size() < crypto_box_MACBYTES) {
      throw Error(ErrorCode::kAuthFailure, "short ciphertext");
    }
    SharedKey k = StaticSharedKey(self_keys, sender_pk);
    auto nonce = StaticNonce(context, env.sender, env.recipient);
    Bytes out(env.ciphertext.size() - crypto_box_MACBYTES);
    if (crypto_box_open_easy_afternm(out.data(), env.ciphertext.data(),
                                     env.ciphertext.size(), nonce.data(), k.data()) != 0) {
      throw Error(ErrorCode::kAuthFailure, "envelope failed authentication");
    }
    return out;
  }
  if (env.ciphertext.size() < crypto_box_SEALBYTES) {
    throw Error(ErrorCode::kAuthFailure, "short ciphertext");
  }
  Bytes out(env.ciphertext.size() - crypto_box_SEALBYTES);
  if (crypto_box_seal_open(out.data(), env.ciphertext.data(), env.ciphertext.size(),
                           self_keys.pk.data(), self_keys.sk.data()) != 0) {
    throw Error(ErrorCode::kAuthFailure, "envelope failed authentication");
  }
  return out;
}

void WriteEnvelope(ByteWriter& w, const SealedEnvelope& e) {
  w.U32(e.recipient).U64(e.sender).U8(static_cast<uint8_t>(e.backend)).Blob(e.ciphertext);
}

SealedEnvelope ReadEnvelope(ByteReader& r) {
  SealedEnvelope e;
  e.recipient = r.U32();
  e.sender = r.U64();
  uint8_t b = r.U8();
  if (b > 1) throw Error(ErrorCode::kDecodeError, "seal backend");
  e.backend = static_cast<SealBackend>(b);
  e.ciphertext = r.Blob();
  return e;
}

}  // namespace byzfed
