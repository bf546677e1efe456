// Copyright 2026 The Tiernet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tiernet/bytes.h"

#include "tiernet/error.h"

namespace tiernet {

Bytes ToBytes(std::string_view text) { return Bytes(text.begin(), text.end()); }

std::string ToString(std::span<const std::uint8_t> bytes) {
  return std::string(bytes.begin(), bytes.end());
}

std::uint64_t Fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    hash ^= b;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

void ByteWriter::U16(std::uint16_t v) {
  U8(static_cast<std::uint8_t>(v >> 8));
  U8(static_cast<std::uint8_t>(v));
}

void ByteWriter::U32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    U8(static_cast<std::uint8_t>(v >> shift));
  }
}

void ByteWriter::U64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    U8(static_cast<std::uint8_t>(v >> shift));
  }
}

void ByteWriter::Blob(std::span<const std::uint8_t> bytes) {
  U32(static_cast<std::uint32_t>(bytes.size()));
  Raw(bytes);
}

void ByteWriter::Str(std::string_view text) {
  U32(static_cast<std::uint32_t>(text.size()));
  out_.insert(out_.end(), text.begin(), text.end());
}

void ByteWriter::Raw(std::span<const std::uint8_t> bytes) {
  out_.insert(out_.end(), bytes.begin(), bytes.end());
}

void ByteReader::Need(std::size_t n) const {
  if (remaining() < n) {
    throw Error(ErrorCode::kParse, "truncated input: need " + std::to_string(n) +
                                       " bytes, have " + std::to_string(remaining()));
  }
}

std::uint8_t ByteReader::U8() {
  Need(1);
  return in_[pos_++];
}

std::uint16_t ByteReader::U16() {
  Need(2);
  std::uint16_t v = static_cast<std::uint16_t>((in_[pos_] << 8) | in_[pos_ + 1]);
  pos_ += 2;
  return v;
}

std::uint32_t ByteReader::U32() {
  Need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | in_[pos_++];
  return v;
}

std::uint64_t ByteReader::U64() {
  Need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | in_[pos_++];
  return v;
}

bool ByteReader::Bool() {
  auto v = U8();
  if (v > 1) throw Error(ErrorCode::kParse, "invalid boolean byte");
  return v == 1;
}

Bytes ByteReader::Blob() {
  auto n = U32();
  auto raw = Raw(n);
  return Bytes(raw.begin(), raw.end());
}

std::string ByteReader::Str() {
  auto n = U32();
  auto raw = Raw(n);
  return std::string(raw.begin(), raw.end());
}

std::span<const std::uint8_t> ByteReader::Raw(std::size_t n) {
  Need(n);
  auto out = in_.subspan(pos_, n);
  pos_ += n;
  return out;
}

void ByteReader::ExpectDone() const {
  if (!done()) {
    throw Error(ErrorCode::kParse,
                std::to_string(remaining()) + " trailing bytes after decode");
  }
}

}  // namespace tiernet
