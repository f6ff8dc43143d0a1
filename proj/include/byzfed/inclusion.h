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

// Debiasing inclusion, PING bookkeeping, wasted-cluster detection and
// statistical blaming of skewed inclusion counts.

#ifndef BYZFED_INCLUSION_H_
#define BYZFED_INCLUSION_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "byzfed/bytes.h"
#include "byzfed/rng.h"
#include "byzfed/signature.h"

namespace byzfed {

// Per-client tie-break values for round `round`: the first 8 bytes of
// SHA-256(seed || round || client). Public and recomputable by anyone.
std::vector<uint64_t> TieBreakValues(const Seed& seed, uint64_t round, uint32_t n_c);

// The rho candidates with the smallest counts, ties by tie-break value then
// id; returned in ascending id order. counts and tiebreak are indexed by
// client id; ids beyond counts.size() count as 0. Throws kNotEnough if
// fewer than rho candidates.
std::vector<uint32_t> Include(std::span<const uint32_t> counts,
                              std::span<const uint32_t> candidates, uint32_t rho,
                              std::span<const uint64_t> tiebreak);

// Signed content of a PING for `round`.
Bytes PingMessage(uint64_t round);

using PingEntries = std::map<uint32_t, Signature>;

class PingList {
 public:
  explicit PingList(uint64_t round = 0) : round_(round) {}

  uint64_t round() const { return round_; }
  size_t size() const { return entries_.size(); }
  bool Contains(uint32_t client) const { return entries_.count(client) != 0; }
  const PingEntries& entries() const { return entries_; }

  // Throws kBadSignature (and leaves the list unchanged) if the signature
  // does not verify. Idempotent per client.
  void Record(uint32_t client, const Signature& sig, std::span<const PublicKey> client_pks);

  // Merges a peer's list only if it has at least `min_size` entries and every
  // entry verifies; otherwise nothing is merged. Returns whether it merged.
  bool Merge(const PingEntries& remote, size_t min_size,
             std::span<const PublicKey> client_pks);

  size_t CountIn(std::span<const uint32_t> cluster) const;

 private:
  uint64_t round_;
  PingEntries entries_;
};

// UNIFICATION bookkeeping for one aggregator and one round.
class UnificationState {
 public:
  // Returns the list to broadcast the first time the quorum is met, unless
  // SUM-SHARES already went out.
  std::optional<PingEntries> MaybeBroadcast(const PingList& pings, size_t quorum);
  void MarkSumSharesSent() { sum_shares_sent_ = true; }
  bool sent() const { return sent_; }

  // Counts a valid UNIFICATION from `sender` (including one's own).
  void RecordValid(uint32_t sender) { received_.insert(sender); }
  size_t received() const { return received_.size(); }

 private:
  bool sent_ = false;
  bool sum_shares_sent_ = false;
  std::set<uint32_t> received_;
};

// Fewer than rho own-cluster participants once the unification threshold
// has been reached.
bool WastedDetection(size_t own_participants, uint32_t rho, size_t unifications,
                     size_t unification_threshold);

struct BlameParams {
  double expected_var = 0;
  double sec_param = 0;
  double delta_max = 0;
  uint32_t keep = 0;  // n_c - 2 t_c
};

struct InclusionStats {
  double variance = 0;  // population variance of the kept values
  double spread = 0;    // max - min of the kept values
};

// Statistics of the `keep` largest counts.
InclusionStats RestrictedStats(std::span<const uint32_t> counts, uint32_t keep);

// True means blame.
bool Blaming(std::span<const uint32_t> counts, const BlameParams& p);

struct BlameCalibrationConfig {
  uint32_t n_c = 0;
  uint32_t n_a = 1;
  uint32_t t_c = 0;
  uint32_t rho = 1;
  uint32_t participation = 0;  // clients seen per round
  uint32_t horizon = 1;
  uint32_t trials = 100;
  uint32_t validation_trials = 100;
  // Optional per-client Gamma(shape, scale) round-trip delay. When set, the
  // `participation` earliest arrivals take part each round instead of a
  // uniformly random subset.
  std::vector<std::pair<double, double>> arrival;
  // Optional per-client first round of absence (crash); absent entries never
  // crash.
  std::map<uint32_t, uint64_t> crash_round;
  Seed assignment_seed{};
  uint64_t mc_seed = 1;
};

struct BlameCalibration {
  BlameParams params;
  double false_blame_rate = 0;  // over (aggregator, round) checks
  uint64_t checks = 0;
};

// Monte-Carlo model of honest aggregators: each round `participation` live
// clients take part (the earliest under the arrival model, else a uniformly
// random subset), the real assignment decides clusters, and every
// aggregator includes from its own counts. Thresholds are set from the calibration batch and the false-blame
// rate is measured on a fresh validation batch.
BlameCalibration CalibrateBlame(const BlameCalibrationConfig& cfg);

}  // namespace byzfed

#endif  // BYZFED_INCLUSION_H_
