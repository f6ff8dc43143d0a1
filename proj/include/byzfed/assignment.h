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

// Per-round partition of clients into n_a clusters of k = n_c / n_a using a
// swap-or-not shuffle (90 rounds, SHA-256) keyed by SHA-256(seed || round).
// Clients and aggregators are numbered from 0.

#ifndef BYZFED_ASSIGNMENT_H_
#define BYZFED_ASSIGNMENT_H_

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "byzfed/bytes.h"
#include "byzfed/rng.h"

namespace byzfed {

inline constexpr int kShuffleRounds = 90;

// Position that list index `index` moves to under the shuffle.
uint32_t ShuffledIndex(uint32_t index, uint32_t count, const Digest& key);

// perm[p] = original index now at position p.
std::vector<uint32_t> ShuffleList(uint32_t count, const Digest& key);

Digest AssignmentKey(const Seed& seed, uint64_t round);

class RoundAssignment {
 public:
  RoundAssignment(uint64_t round, uint32_t n_c, uint32_t n_a, std::vector<uint32_t> perm);

  uint64_t round() const { return round_; }
  uint32_t num_clients() const { return static_cast<uint32_t>(perm_.size()); }
  uint32_t num_aggregators() const { return n_a_; }
  uint32_t cluster_size() const { return k_; }

  std::span<const uint32_t> Cluster(uint32_t aggregator) const {
    return std::span(perm_).subspan(static_cast<size_t>(aggregator) * k_, k_);
  }
  uint32_t AggregatorOf(uint32_t client) const { return owner_[client]; }

  bool operator==(const RoundAssignment& o) const {
    return round_ == o.round_ && n_a_ == o.n_a_ && perm_ == o.perm_;
  }

 private:
  uint64_t round_;
  uint32_t n_a_;
  uint32_t k_;
  std::vector<uint32_t> perm_;
  std::vector<uint32_t> owner_;
};

// Throws kDivisibilityViolation unless n_a divides n_c (n_a, n_c > 0).
RoundAssignment Assign(uint64_t round, uint32_t n_c, uint32_t n_a, const Seed& seed);

// Memoized Assign; every node recomputes the same partition, so sharing the
// result within a process is safe.
std::shared_ptr<const RoundAssignment> AssignCached(uint64_t round, uint32_t n_c,
                                                    uint32_t n_a, const Seed& seed);

uint32_t Assigned(uint64_t round, uint32_t client, uint32_t n_c, uint32_t n_a,
                  const Seed& seed);

}  // namespace byzfed

#endif  // BYZFED_ASSIGNMENT_H_
