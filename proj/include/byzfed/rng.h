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

// Seeded randomness. Every stream in a run is derived from one root seed by
// labeled hashing, so no component ever touches ambient entropy.
//
// The distributions are written out here rather than taken from <random>
// because the standard leaves their algorithms implementation-defined, and
// traces must hash identically across standard libraries.

#ifndef BYZFED_RNG_H_
#define BYZFED_RNG_H_

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace byzfed {

using Seed = std::array<uint8_t, 32>;

Seed SeedFromU64(uint64_t root);

// BLAKE2b keyed by `parent` over (label || ids as LE u64).
Seed DeriveSeed(const Seed& parent, std::string_view label,
                std::initializer_list<uint64_t> ids = {});

// ChaCha20 keystream as a 64-bit UniformRandomBitGenerator. Also serves as
// the extendable-output function for public parameter expansion.
class ChaChaRng {
 public:
  using result_type = uint64_t;

  explicit ChaChaRng(const Seed& seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()();

 private:
  void Refill();

  Seed key_;
  uint32_t block_counter_ = 0;
  std::array<uint8_t, 512> buf_{};
  size_t pos_ = 512;
};

// [0, 1) with 53 random bits.
double UniformDouble(ChaChaRng& rng);
// Uniform integer in [0, n), n > 0, without modulo bias.
uint64_t UniformBelow(ChaChaRng& rng, uint64_t n);
// Standard normal via the polar method.
double StandardNormal(ChaChaRng& rng);
// Gamma(shape, scale) via Marsaglia-Tsang.
double GammaSample(ChaChaRng& rng, double shape, double scale);

}  // namespace byzfed

#endif  // BYZFED_RNG_H_
