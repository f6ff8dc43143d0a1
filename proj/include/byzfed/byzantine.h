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

// Byzantine aggregator scripts. Each wraps an otherwise honest Aggregator
// and rewrites what it emits; colluders share a blackboard. Scripts can only
// sign with their own key.

#ifndef BYZFED_BYZANTINE_H_
#define BYZFED_BYZANTINE_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "byzfed/aggregator.h"
#include "byzfed/node.h"

namespace byzfed {

enum class ByzScript {
  kHalt,           // silent from halt_round on
  kOmit,           // talks to its clients only, and to half of them
  kFabricate,      // forged model in TRAIN plus uncertified INTER-CLUSTER-SUMs
  kTamper,         // corrupts the summed shares it returns
  kEquivocate,     // second SUM-SHARES bundle with one client swapped
  kBiasInclusion,  // always includes its lowest-numbered participants
  kCollude,        // honest-looking, but records every share it sees
};

ByzScript ParseByzScript(const std::string& s);
std::string ByzScriptName(ByzScript s);

struct ByzOptions {
  uint64_t halt_round = 0;
};

// Shared adversary state.
struct Blackboard {
  using BundleKey = std::tuple<uint64_t, uint32_t, std::vector<uint32_t>>;

  struct Equivocation {
    uint64_t round = 0;
    uint32_t coordinator = 0;
    std::vector<uint32_t> first, second;
    uint32_t dropped = 0;  // in first only
    uint32_t added = 0;    // in second only
    FieldVec h_first, h_second;
  };

  std::set<uint32_t> members;
  // Summed shares observed for each bundle, by owner.
  std::map<BundleKey, std::map<uint32_t, Share>> shares;
  std::vector<Equivocation> equivocations;
};

class ByzantineAggregator : public Node {
 public:
  ByzantineAggregator(uint32_t id, std::shared_ptr<const ProtocolContext> ctx, NodeKeys keys,
                      ByzScript script, std::shared_ptr<Blackboard> board,
                      ByzOptions opts = {});

  std::vector<Outgoing> OnStart() override;
  std::vector<Outgoing> OnMessage(uint32_t src, std::span<const uint8_t> payload) override;

  Aggregator& inner() { return inner_; }
  ByzScript script() const { return script_; }

 private:
  std::vector<Outgoing> Rewrite(std::vector<Outgoing> out);
  void Observe(uint32_t src, const Message& m);
  void MaybeEquivocate(std::vector<Outgoing>& out);

  Aggregator inner_;
  std::shared_ptr<const ProtocolContext> ctx_;
  ByzScript script_;
  std::shared_ptr<Blackboard> board_;
  ByzOptions opts_;
  ChaChaRng rng_;
  std::set<uint64_t> equivocated_;
  std::set<uint64_t> fabricated_;
};

struct OracleResult {
  uint64_t round = 0;
  uint32_t target = 0;  // the client the attack tries to isolate
  bool first_recovered = false;
  bool second_recovered = false;
  FieldVec estimate;  // the adversary's guess at encode(g_bar + e) of target
};

// The differencing attack: reconstruct both equivocated bundles from
// whatever shares the adversary holds (interpolating anyway when short of
// the threshold), subtract, and add back the swapped-in client's true value
// (granted by `truth`, a strictly stronger adversary).
std::vector<OracleResult> DifferencingOracle(
    const Blackboard& board, const ProtocolContext& ctx,
    const std::function<FieldVec(uint32_t client, uint64_t round)>& truth);

}  // namespace byzfed

#endif  // BYZFED_BYZANTINE_H_
