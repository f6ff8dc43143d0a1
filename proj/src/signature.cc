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

#include "byzfed/signature.h"

#include <sodium.h>

#include <algorithm>
#include <cstring>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "byzfed/error.h"

namespace byzfed {
namespace {

void InitSodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw Error(ErrorCode::kBadParams, "libsodium init failed");
}

struct DigestHash {
  size_t operator()(const Digest& d) const {
    size_t h;
    std::memcpy(&h, d.data(), sizeof(h));
    return h;
  }
};

class VerifyCache {
 public:
  std::optional<bool> Lookup(const Digest& key) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = map_.find(key);
    if (it == map_.end()) return std::nullopt;
    return it->second;
  }
  void Store(const Digest& key, bool ok) {
    std::lock_guard<std::mutex> lock(mu_);
    if (map_.size() >= kMaxEntries) map_.clear();
    map_.emplace(key, ok);
  }

 private:
  static constexpr size_t kMaxEntries = 1 << 21;
  std::mutex mu_;
  std::unordered_map<Digest, bool, DigestHash> map_;
};

VerifyCache& Cache() {
  static VerifyCache cache;
  return cache;
}

}  // namespace

SigningKeyPair SigningKeyFromSeed(const Seed& seed) {
  InitSodium();
  SigningKeyPair kp;
  crypto_sign_seed_keypair(kp.pk.data(), kp.sk.data(), seed.data());
  return kp;
}

Signature Sign(std::span<const uint8_t> msg, const SecretKey& sk) {
  Signature sig;
  crypto_sign_detached(sig.data(), nullptr, msg.data(), msg.size(), sk.data());
  return sig;
}

bool Verify(std::span<const uint8_t> msg, const Signature& sig, const PublicKey& pk) {
  crypto_hash_sha256_state st;
  crypto_hash_sha256_init(&st);
  crypto_hash_sha256_update(&st, pk.data(), pk.size());
  crypto_hash_sha256_update(&st, sig.data(), sig.size());
  crypto_hash_sha256_update(&st, msg.data(), msg.size());
  Digest key;
  crypto_hash_sha256_final(&st, key.data());
  if (auto hit = Cache().Lookup(key)) return *hit;
  bool ok = crypto_sign_verify_detached(sig.data(), msg.data(), msg.size(), pk.data()) == 0;
  Cache().Store(key, ok);
  return ok;
}

void WriteSignature(ByteWriter& w, const Signature& s) { w.Raw(s); }
Signature ReadSignature(ByteReader& r) { return r.Fixed<64>(); }

SigShare SignDigest(uint32_t signer, const Digest& d, const SecretKey& sk) {
  return {signer, d, Sign(d, sk)};
}

ThresholdCert ThresholdCombine(const Digest& digest, std::span<const SigShare> shares,
                               uint32_t threshold, std::span<const PublicKey> pks) {
  ThresholdCert cert;
  cert.digest = digest;
  cert.threshold = threshold;
  for (const SigShare& s : shares) {
    if (s.digest != digest || s.signer >= pks.size()) continue;
    if (!Verify(s.digest, s.sig, pks[s.signer])) continue;
    for (const auto& [signer, sig] : cert.sigs) {
      if (signer == s.signer) {
        throw Error(ErrorCode::kDuplicateSigner, "signer " + std::to_string(signer));
      }
    }
    cert.sigs.emplace_back(s.signer, s.sig);
  }
  if (cert.sigs.size() < threshold) {
    throw Error(ErrorCode::kBelowThreshold,
                std::to_string(cert.sigs.size()) + " of " + std::to_string(threshold));
  }
  std::sort(cert.sigs.begin(), cert.sigs.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return cert;
}

ThresholdCert ThresholdCombine(std::span<const SigShare> shares, uint32_t threshold,
                               std::span<const PublicKey> pks) {
  if (shares.empty()) throw Error(ErrorCode::kBelowThreshold, "no signatures");
  Digest best = shares.front().digest;
  size_t best_count = 0;
  for (const SigShare& s : shares) {
    size_t n = std::count_if(shares.begin(), shares.end(),
                             [&](const SigShare& o) { return o.digest == s.digest; });
    if (n > best_count) {
      best = s.digest;
      best_count = n;
    }
  }
  return ThresholdCombine(best, shares, threshold, pks);
}

bool VerifyCombined(const ThresholdCert& cert, const Digest& digest,
                    std::span<const PublicKey> pks, uint32_t required) {
  if (cert.digest != digest) return false;
  // Invalid or repeated entries are ignored rather than fatal; only the
  // count of distinct valid signers matters.
  std::vector<uint32_t> seen;
  for (const auto& [signer, sig] : cert.sigs) {
    if (signer >= pks.size()) continue;
    if (std::find(seen.begin(), seen.end(), signer) != seen.end()) continue;
    if (!Verify(digest, sig, pks[signer])) continue;
    seen.push_back(signer);
  }
  return seen.size() >= std::max(required, cert.threshold);
}

void WriteCert(ByteWriter& w, const ThresholdCert& c) {
  w.Raw(c.digest).U32(c.threshold).U32(static_cast<uint32_t>(c.sigs.size()));
  for (const auto& [signer, sig] : c.sigs) {
    w.U32(signer);
    WriteSignature(w, sig);
  }
}

ThresholdCert ReadCert(ByteReader& r) {
  ThresholdCert c;
  c.digest = r.Fixed<32>();
  c.threshold = r.U32();
  uint32_t n = r.U32();
  if (n > r.remaining() / 68) throw Error(ErrorCode::kDecodeError, "cert size");
  for (uint32_t i = 0; i < n; ++i) {
    uint32_t signer = r.U32();
    c.sigs.emplace_back(signer, ReadSignature(r));
  }
  return c;
}

}  // namespace byzfed
