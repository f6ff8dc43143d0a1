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

#include "byzfed/rng.h"

#include <sodium.h>

#include <cmath>
#include <cstring>

#include "byzfed/bytes.h"

namespace byzfed {

Seed SeedFromU64(uint64_t root) {
  ByteWriter w;
  w.Str("byzfed/root").U64(root);
  return Sha256(w.bytes());
}

Seed DeriveSeed(const Seed& parent, std::string_view label,
                std::initializer_list<uint64_t> ids) {
  ByteWriter w;
  w.Str(label);
  for (uint64_t id : ids) w.U64(id);
  Seed out;
  crypto_generichash(out.data(), out.size(), w.bytes().data(), w.bytes().size(),
                     parent.data(), parent.size());
  return out;
}

ChaChaRng::ChaChaRng(const Seed& seed) : key_(seed) {}

void ChaChaRng::Refill() {
  static const uint8_t kNonce[crypto_stream_chacha20_ietf_NONCEBYTES] = {};
  std::memset(buf_.data(), 0, buf_.size());
  crypto_stream_chacha20_ietf_xor_ic(buf_.data(), buf_.data(), buf_.size(),
                                     kNonce, block_counter_, key_.data());
  block_counter_ += static_cast<uint32_t>(buf_.size() / 64);
  pos_ = 0;
}

ChaChaRng::result_type ChaChaRng::operator()() {
  if (pos_ + 8 > buf_.size()) Refill();
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(buf_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return v;
}

double UniformDouble(ChaChaRng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

uint64_t UniformBelow(ChaChaRng& rng, uint64_t n) {
  const uint64_t limit = std::numeric_limits<uint64_t>::max() -
                         std::numeric_limits<uint64_t>::max() % n;
  while (true) {
    uint64_t v = rng();
    if (v < limit) return v % n;
  }
}

double StandardNormal(ChaChaRng& rng) {
  while (true) {
    double u = 2.0 * UniformDouble(rng) - 1.0;
    double v = 2.0 * UniformDouble(rng) - 1.0;
    double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

double GammaSample(ChaChaRng& rng, double shape, double scale) {
  if (shape < 1.0) {
    // Boost to shape + 1 and correct with U^(1/shape).
    double u = UniformDouble(rng);
    while (u <= 0.0) u = UniformDouble(rng);
    return GammaSample(rng, shape + 1.0, scale) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x = StandardNormal(rng);
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    double u = UniformDouble(rng);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v * scale;
    }
  }
}

}  // namespace byzfed
