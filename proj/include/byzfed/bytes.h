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

// Canonical little-endian byte encoding shared by the wire format and every
// signed tuple. Variable-length fields are prefixed with a u32 length.

#ifndef BYZFED_BYTES_H_
#define BYZFED_BYTES_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace byzfed {

using Bytes = std::vector<uint8_t>;
using Digest = std::array<uint8_t, 32>;

class ByteWriter {
 public:
  ByteWriter() = default;

  ByteWriter& U8(uint8_t v);
  ByteWriter& U32(uint32_t v);
  ByteWriter& U64(uint64_t v);
  ByteWriter& I64(int64_t v) { return U64(static_cast<uint64_t>(v)); }
  ByteWriter& F64(double v);
  // Length-prefixed.
  ByteWriter& Blob(std::span<const uint8_t> data);
  ByteWriter& Str(std::string_view s);
  // No length prefix; caller knows the size.
  ByteWriter& Raw(std::span<const uint8_t> data);

  const Bytes& bytes() const { return buf_; }
  Bytes Take() { return std::move(buf_); }

 private:
  Bytes buf_;
};

// Throws Error(kDecodeError) on truncated input.
class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

  uint8_t U8();
  uint32_t U32();
  uint64_t U64();
  int64_t I64() { return static_cast<int64_t>(U64()); }
  double F64();
  Bytes Blob();
  std::string Str();
  Bytes Raw(size_t n);
  template <size_t N>
  std::array<uint8_t, N> Fixed() {
    std::array<uint8_t, N> out;
    Need(N);
    for (size_t i = 0; i < N; ++i) out[i] = data_[pos_ + i];
    pos_ += N;
    return out;
  }

  bool done() const { return pos_ == data_.size(); }
  size_t remaining() const { return data_.size() - pos_; }
  // Throws unless the whole buffer was consumed.
  void ExpectDone() const;

 private:
  void Need(size_t n) const;

  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

Digest Sha256(std::span<const uint8_t> data);
Digest Sha256(std::string_view data);
std::string Hex(std::span<const uint8_t> data);

}  // namespace byzfed

#endif  // BYZFED_BYTES_H_
