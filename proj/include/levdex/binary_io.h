// Copyright 2026 The Levdex Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LEVDEX_BINARY_IO_H_
#define LEVDEX_BINARY_IO_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace levdex {

// Little-endian serializer used by every persisted artifact. Each artifact
// file starts with an 8-byte magic and a u32 format version.
class BinaryWriter {
 public:
  void WriteMagic(std::string_view magic, std::uint32_t version);
  void WriteU32(std::uint32_t v);
  void WriteU64(std::uint64_t v);
  void WriteI64(std::int64_t v) { WriteU64(static_cast<std::uint64_t>(v)); }
  void WriteF64(double v);
  void WriteF64s(std::span<const double> v);
  void WriteString(std::string_view s);

  const std::string& bytes() const { return bytes_; }

  // Writes the buffer atomically enough for our purposes (temp + rename).
  void SaveTo(const std::string& path) const;

 private:
  std::string bytes_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::string bytes) : bytes_(std::move(bytes)) {}

  // Reads the whole file. Throws IO_ERROR if unreadable.
  static BinaryReader FromFile(const std::string& path);

  // Throws VERSION_MISMATCH on wrong magic or version.
  void ExpectMagic(std::string_view magic, std::uint32_t version);
  std::uint32_t ReadU32();
  std::uint64_t ReadU64();
  std::int64_t ReadI64() { return static_cast<std::int64_t>(ReadU64()); }
  double ReadF64();
  void ReadF64s(std::span<double> out);
  std::string ReadString();

  bool AtEnd() const { return pos_ == bytes_.size(); }
  // Throws IO_ERROR when trailing bytes remain.
  void ExpectEnd() const;

 private:
  void Need(std::size_t n) const;

  std::string bytes_;
  std::size_t pos_ = 0;
};

// FNV-1a 64-bit hash, rendered as 16 hex digits where a string is needed.
std::uint64_t Fnv1a64(std::string_view data);
std::string HexDigest(std::uint64_t h);
// Hash of a file's bytes; throws IO_ERROR if unreadable.
std::string HashFile(const std::string& path);

std::string ReadFileToString(const std::string& path);
void WriteStringToFile(const std::string& path, std::string_view data);

}  // namespace levdex

#endif  // LEVDEX_BINARY_IO_H_
