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

#include "byzfed/bytes.h"

#include <sodium.h>

#include <bit>
#include <cstring>

#include "byzfed/error.h"

namespace byzfed {

ByteWriter& ByteWriter::U8(uint8_t v) {
  buf_.push_back(v);
  return *this;
}

ByteWriter& ByteWriter::U32(uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  return *this;
}

ByteWriter& ByteWriter::U64(uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  return *this;
}

ByteWriter& ByteWriter::F64(double v) { return U64(std::bit_cast<uint64_t>(v)); }

ByteWriter& ByteWriter::Blob(std::span<const uint8_t> data) {
  U32(static_cast<uint32_t>(data.size()));
  return Raw(data);
}

ByteWriter& ByteWriter::Str(std::string_view s) {
  return Blob({reinterpret_cast<const uint8_t*>(s.data()), s.size()});
}

ByteWriter& ByteWriter::Raw(std::span<const uint8_t> data) {
  buf_.insert(buf_.end(), data.begin(), data.end());
  return *this;
}

void ByteReader::Need(size_t n) const {
  if (data_.size() - pos_ < n) {
    throw Error(ErrorCode::kDecodeError, "truncated input");
  }
}

uint8_t ByteReader::U8() {
  Need(1);
  return data_[pos_++];
}

uint32_t ByteReader::U32() {
  Need(4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(data_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return v;
}

uint64_t ByteReader::U64() {
  Need(8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(data_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return v;
}

double ByteReader::F64() { return std::bit_cast<double>(U64()); }

Bytes ByteReader::Blob() { return Raw(U32()); }

std::string ByteReader::Str() {
  Bytes b = Blob();
  return std::string(b.begin(), b.end());
}

Bytes ByteReader::Raw(size_t n) {
  Need(n);
  Bytes out(data_.begin() + pos_, data_.begin() + pos_ + n);
  pos_ += n;
  return out;
}

void ByteReader::ExpectDone() const {
  if (!done()) throw Error(ErrorCode::kDecodeError, "trailing bytes");
}

Digest Sha256(std::span<const uint8_t> data) {
  Digest out;
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

Digest Sha256(std::string_view data) {
  return Sha256({reinterpret_cast<const uint8_t*>(data.data()), data.size()});
}

std::string Hex(std::span<const uint8_t> data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * data.size());
  for (uint8_t b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 15]);
  }
  return out;
}

}  // namespace byzfed
