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

#include "byzfed/assignment.h"

#include <sodium.h>

#include <map>
#include <mutex>
#include <string>
#include <tuple>

#include "byzfed/error.h"

namespace byzfed {
namespace {

uint64_t PivotFor(const Digest& key, uint8_t round, uint32_t count) {
  uint8_t buf[33];
  std::copy(key.begin(), key.end(), buf);
  buf[32] = round;
  Digest h;
  crypto_hash_sha256(h.data(), buf, sizeof(buf));
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(h[i]) << (8 * i);
  return v % count;
}

Digest SourceFor(const Digest& key, uint8_t round, uint32_t block) {
  uint8_t buf[37];
  std::copy(key.begin(), key.end(), buf);
  buf[32] = round;
  for (int i = 0; i < 4; ++i) buf[33 + i] = static_cast<uint8_t>(block >> (8 * i));
  Digest h;
  crypto_hash_sha256(h.data(), buf, sizeof(buf));
  return h;
}

bool Bit(const Digest& source, uint32_t position) {
  return (source[(position % 256) / 8] >> (position % 8)) & 1;
}

}  // namespace

uint32_t ShuffledIndex(uint32_t index, uint32_t count, const Digest& key) {
  if (index >= count) throw Error(ErrorCode::kBadParams, "index out of range");
  for (int r = 0; r < kShuffleRounds; ++r) {
    uint64_t pivot = PivotFor(key, static_cast<uint8_t>(r), count);
    uint32_t flip = static_cast<uint32_t>((pivot + count - index) % count);
    uint32_t position = std::max(index, flip);
    if (Bit(SourceFor(key, static_cast<uint8_t>(r), position / 256), position)) index = flip;
  }
  return index;
}

std::vector<uint32_t> ShuffleList(uint32_t count, const Digest& key) {
  std::vector<uint32_t> perm(count);
  for (uint32_t i = 0; i < count; ++i) perm[i] = i;
  if (count <= 1) return perm;
  const uint32_t blocks = (count + 255) / 256;
  std::vector<Digest> sources(blocks);
  for (int r = 0; r < kShuffleRounds; ++r) {
    const uint8_t rr = static_cast<uint8_t>(r);
    uint64_t pivot = PivotFor(key, rr, count);
    for (uint32_t b = 0; b < blocks; ++b) sources[b] = SourceFor(key, rr, b);
    // Each unordered pair {i, pivot - i} is visited once, from its smaller end.
    for (uint32_t i = 0; i < count; ++i) {
      uint32_t flip = static_cast<uint32_t>((pivot + count - i) % count);
      if (flip <= i) continue;
      if (Bit(sources[flip / 256], flip)) std::swap(perm[i], perm[flip]);
    }
  }
  return perm;
}

Digest AssignmentKey(const Seed& seed, uint64_t round) {
  ByteWriter w;
  w.Raw(seed).U64(round);
  return Sha256(w.bytes());
}

RoundAssignment::RoundAssignment(uint64_t round, uint32_t n_c, uint32_t n_a,
                                 std::vector<uint32_t> perm)
    : round_(round), n_a_(n_a), k_(n_c / n_a), perm_(std::move(perm)), owner_(n_c) {
  for (uint32_t p = 0; p < n_c; ++p) owner_[perm_[p]] = p / k_;
}

RoundAssignment Assign(uint64_t round, uint32_t n_c, uint32_t n_a, const Seed& seed) {
  if (n_a == 0 || n_c == 0 || n_c % n_a != 0) {
    throw Error(ErrorCode::kDivisibilityViolation,
                "n_a=" + std::to_string(n_a) + " must divide n_c=" + std::to_string(n_c));
  }
  return RoundAssignment(round, n_c, n_a, ShuffleList(n_c, AssignmentKey(seed, round)));
}

std::shared_ptr<const RoundAssignment> AssignCached(uint64_t round, uint32_t n_c,
                                                    uint32_t n_a, const Seed& seed) {
  using Key = std::tuple<Seed, uint64_t, uint32_t, uint32_t>;
  static std::mutex mu;
  static std::map<Key, std::shared_ptr<const RoundAssignment>> cache;
  Key key{seed, round, n_c, n_a};
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto a = std::make_shared<const RoundAssignment>(Assign(round, n_c, n_a, seed));
  std::lock_guard<std::mutex> lock(mu);
  if (cache.size() > 4096) cache.clear();
  cache.emplace(key, a);
  return a;
}

uint32_t Assigned(uint64_t round, uint32_t client, uint32_t n_c, uint32_t n_a,
                  const Seed& seed) {
  if (client >= n_c) throw Error(ErrorCode::kBadParams, "client id out of range");
  return AssignCached(round, n_c, n_a, seed)->AggregatorOf(client);
}

}  // namespace byzfed
