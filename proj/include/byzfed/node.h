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

// Reactive node interface shared by clients, aggregators and Byzantine
// wrappers. Handlers see only messages, never a clock.

#ifndef BYZFED_NODE_H_
#define BYZFED_NODE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "byzfed/bytes.h"

namespace byzfed {

struct Outgoing {
  uint32_t dst = 0;
  Bytes payload;
};

class Node {
 public:
  virtual ~Node() = default;
  virtual std::vector<Outgoing> OnStart() { return {}; }
  virtual std::vector<Outgoing> OnMessage(uint32_t src, std::span<const uint8_t> payload) = 0;
};

}  // namespace byzfed

#endif  // BYZFED_NODE_H_
