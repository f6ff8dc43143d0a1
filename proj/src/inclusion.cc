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

#include "byzfed/inclusion.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "byzfed/assignment.h"
#include "byzfed/error.h"

namespace byzfed {

std::vector<uint64_t> TieBreakValues(const Seed& seed, uint64_t round, uint32_t n_c) {
  std::vector<uint64_t> out(n_c);
  for (uint32_t c = 0; c < n_c; ++c) {
    ByteWriter w;
    w.Str("byzfed/include").Raw(seed).U64(round).U32(c);
    Digest d = Sha256(w.bytes());
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(d[i]) << (8 * i);
    out[c] = v;
  }
  return out;
}

std::vector<uint32_t> Include(std::span<const uint32_t> counts,
                              std::span<const uint32_t> candidates, uint32_t rho,
                              std::span<const uint64_t> tiebreak) {
  if (candidates.size() < rho) {
    throw Error(ErrorCode::kNotEnough, std::to_string(candidates.size()) +
                                           " candidates for rho=" + std::to_string(rho));
  }
  auto count_of = [&](uint32_t c) -> uint32_t { return c < counts.size() ? counts[c] : 0; };
  auto tb_of = [&](uint32_t c) -> uint64_t { return c < tiebreak.size() ? tiebreak[c] : 0; };
  std::vector<uint32_t> order(candidates.begin(), candidates.end());
  std::partial_sort(order.begin(), order.begin() + rho, order.end(),
                    [&](uint32_t a, uint32_t b) {
                      if (count_of(a) != count_of(b)) return count_of(a) < count_of(b);
                      if (tb_of(a) != tb_of(b)) return tb_of(a) < tb_of(b);
                      return a < b;
                    });
  order.resize(rho);
  std::sort(order.begin(), order.end());
  return order;
}

Bytes PingMessage(uint64_t round) {
  ByteWriter w;
  w.Str("byzfed/ping").U64(round);
  return w.Take();
}

void PingList::Record(uint32_t client, const Signature& sig,
                      std::span<const PublicKey> client_pks) {
  if (client >= client_pks.size() || !Verify(PingMessage(round_), sig, client_pks[client])) {
    throw Error(ErrorCode::kBadSignature, "ping from client " + std::to_string(client));
  }
  entries_.emplace(client, sig);
}

bool PingList::Merge(const PingEntries& remote, size_t min_size,
                     std::span<const PublicKey> client_pks) {
  if (remote.size() < min_size) return false;
  const Bytes msg = PingMessage(round_);
  for (const auto& [client, sig] : remote) {
    if (client >= client_pks.size() || !Verify(msg, sig, client_pks[client])) return false;
  }
  for (const auto& [client, sig] : remote) entries_.emplace(client, sig);
  return true;
}

size_t PingList::CountIn(std::span<const uint32_t> cluster) const {
  size_t n = 0;
  for (uint32_t c : cluster) n += Contains(c);
  return n;
}

std::optional<PingEntries> UnificationState::MaybeBroadcast(const PingList& pings,
                                                            size_t quorum) {
  if (sent_ || sum_shares_sent_ || pings.size() < quorum) return std::nullopt;
  sent_ = true;
  return pings.entries();
}

bool WastedDetection(size_t own_participants, uint32_t rho, size_t unifications,
                     size_t unification_threshold) {
  return own_participants < rho && unifications >= unification_threshold;
}

InclusionStats RestrictedStats(std::span<const uint32_t> counts, uint32_t keep) {
  InclusionStats s;
  if (counts.empty() || keep == 0) return s;
  keep = std::min<uint32_t>(keep, static_cast<uint32_t>(counts.size()));
  std::vector<uint32_t> v(counts.begin(), counts.end());
  std::nth_element(v.begin(), v.begin() + keep - 1, v.end(), std::greater<>());
  v.resize(keep);
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  s.spread = static_cast<double>(*hi) - static_cast<double>(*lo);
  double mean = std::accumulate(v.begin(), v.end(), 0.0) / keep;
  double ss = 0;
  for (uint32_t x : v) ss += (x - mean) * (x - mean);
  s.variance = ss / keep;
  return s;
}

bool Blaming(std::span<const uint32_t> counts, const BlameParams& p) {
  InclusionStats s = RestrictedStats(counts, p.keep);
  return s.variance > p.expected_var + p.sec_param || s.spread > p.delta_max;
}

namespace {

struct TrialObservation {
  std::vector<double> vars;  // restricted variance at every inclusion
  double max_spread = 0;
  double max_excess = 0;
  uint64_t checks = 0;
  uint64_t blames = 0;
};

TrialObservation RunTrial(const BlameCalibrationConfig& cfg, ChaChaRng& rng,
                          const std::vector<std::vector<uint64_t>>& tiebreaks,
                          const BlameParams* check) {
  const uint32_t n_c = cfg.n_c, n_a = cfg.n_a;
  const uint32_t k = n_c / n_a;
  const uint32_t keep = n_c > 2 * cfg.t_c ? n_c - 2 * cfg.t_c : n_c;
  std::vector<std::vector<uint32_t>> lambda(n_a, std::vector<uint32_t>(n_c, 0));
  std::vector<uint32_t> totals(n_c, 0);
  std::vector<uint32_t> live;
  std::vector<std::pair<double, uint32_t>> arrivals;
  std::vector<char> present(n_c);
  TrialObservation obs;
  for (uint32_t tau = 0; tau < cfg.horizon; ++tau) {
    auto assign = AssignCached(tau, n_c, n_a, cfg.assignment_seed);
    std::fill(present.begin(), present.end(), 0);
    live.clear();
    for (uint32_t c = 0; c < n_c; ++c) {
      auto it = cfg.crash_round.find(c);
      if (it == cfg.crash_round.end() || tau < it->second) live.push_back(c);
    }
    const size_t take = std::min<size_t>(cfg.participation, live.size());
    if (cfg.arrival.empty()) {
      // Uniform random subset (partial Fisher-Yates).
      for (size_t i = 0; i < take; ++i) {
        size_t j = i + static_cast<size_t>(UniformBelow(rng, live.size() - i));
        std::swap(live[i], live[j]);
        present[live[i]] = 1;
      }
    } else {
      arrivals.clear();
      for (uint32_t c : live) {
        arrivals.emplace_back(GammaSample(rng, cfg.arrival[c].first, cfg.arrival[c].second), c);
      }
      std::partial_sort(arrivals.begin(), arrivals.begin() + take, arrivals.end());
      for (size_t i = 0; i < take; ++i) present[arrivals[i].second] = 1;
    }
    for (uint32_t a = 0; a < n_a; ++a) {
      std::vector<uint32_t> cand;
      for (uint32_t c : assign->Cluster(a)) {
        if (present[c]) cand.push_back(c);
      }
      if (cand.size() < cfg.rho) continue;
      auto chosen = Include(lambda[a], cand, cfg.rho, tiebreaks[tau]);
      for (uint32_t c : chosen) ++lambda[a][c];
      if (check != nullptr) {
        ++obs.checks;
        if (Blaming(lambda[a], *check)) {
          // A self-blamed aggregator declares itself wasted; roll back.
          ++obs.blames;
          for (uint32_t c : chosen) --lambda[a][c];
          continue;
        }
      }
      for (uint32_t c : chosen) ++totals[c];
      InclusionStats s = RestrictedStats(lambda[a], keep);
      obs.max_spread = std::max(obs.max_spread, s.spread);
      obs.vars.push_back(s.variance);
    }
    const double fair = std::ceil(static_cast<double>(tau + 1) * cfg.rho / k);
    double top = *std::max_element(totals.begin(), totals.end());
    obs.max_excess = std::max(obs.max_excess, top - fair);
  }
  return obs;
}

}  // namespace

BlameCalibration CalibrateBlame(const BlameCalibrationConfig& cfg) {
  if (cfg.n_a == 0 || cfg.n_c % cfg.n_a != 0) {
    throw Error(ErrorCode::kDivisibilityViolation, "n_a must divide n_c");
  }
  if (cfg.trials < 2 || cfg.rho == 0) throw Error(ErrorCode::kBadParams, "calibration size");
  if (!cfg.arrival.empty() && cfg.arrival.size() != cfg.n_c) {
    throw Error(ErrorCode::kBadParams, "arrival model needs one entry per client");
  }
  std::vector<std::vector<uint64_t>> tiebreaks;
  for (uint32_t tau = 0; tau < cfg.horizon; ++tau) {
    tiebreaks.push_back(TieBreakValues(cfg.assignment_seed, tau, cfg.n_c));
  }
  Seed mc = SeedFromU64(cfg.mc_seed);
  std::vector<double> vars;
  double spread = 0, excess = 0;
  for (uint32_t t = 0; t < cfg.trials; ++t) {
    ChaChaRng rng(DeriveSeed(mc, "byzfed/blame-calibration", {t}));
    TrialObservation obs = RunTrial(cfg, rng, tiebreaks, nullptr);
    vars.insert(vars.end(), obs.vars.begin(), obs.vars.end());
    spread = std::max(spread, obs.max_spread);
    excess = std::max(excess, obs.max_excess);
  }
  double mean = std::accumulate(vars.begin(), vars.end(), 0.0) / vars.size();
  double ss = 0;
  for (double v : vars) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / (vars.size() - 1));

  // The variance distribution pools every honest check, not just the end of
  // the horizon: counts oscillate as round-robin inclusion wraps around, and
  // a threshold fitted to one phase blames honest aggregators at another.
  BlameCalibration out;
  out.params.expected_var = mean;
  out.params.sec_param = 3 * sd;
  out.params.delta_max = std::max(spread, excess) + 1;
  out.params.keep = cfg.n_c > 2 * cfg.t_c ? cfg.n_c - 2 * cfg.t_c : cfg.n_c;

  uint64_t checks = 0, blames = 0;
  for (uint32_t t = 0; t < cfg.validation_trials; ++t) {
    ChaChaRng rng(DeriveSeed(mc, "byzfed/blame-validation", {t}));
    TrialObservation obs = RunTrial(cfg, rng, tiebreaks, &out.params);
    checks += obs.checks;
    blames += obs.blames;
  }
  out.checks = checks;
  out.false_blame_rate = checks == 0 ? 0.0 : static_cast<double>(blames) / checks;
  return out;
}

}  // namespace byzfed
