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

#include "levdex/binary_io.h"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "levdex/error.h"

namespace levdex {

void BinaryWriter::WriteMagic(std::string_view magic, std::uint32_t version) {
  std::string padded(magic.substr(0, 8));
  padded.resize(8, '\0');
  bytes_ += padded;
  WriteU32(version);
}

void BinaryWriter::WriteU32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void BinaryWriter::WriteU64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void BinaryWriter::WriteF64(double v) { WriteU64(std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::WriteF64s(std::span<const double> v) {
  for (double x : v) WriteF64(x);
}

void BinaryWriter::WriteString(std::string_view s) {
  WriteU32(static_cast<std::uint32_t>(s.size()));
  bytes_.append(s);
}

void BinaryWriter::SaveTo(const std::string& path) const {
  WriteStringToFile(path, bytes_);
}

BinaryReader BinaryReader::FromFile(const std::string& path) {
  return BinaryReader(ReadFileToString(path));
}

void BinaryReader::Need(std::size_t n) const {
  if (bytes_.size() - pos_ < n) {
    throw Error(ErrorCode::kIoError, "truncated file at byte " + std::to_string(pos_));
  }
}

void BinaryReader::ExpectMagic(std::string_view magic, std::uint32_t version) {
  std::string padded(magic.substr(0, 8));
  padded.resize(8, '\0');
  if (bytes_.size() < 12 || bytes_.compare(0, 8, padded) != 0) {
    throw Error(ErrorCode::kVersionMismatch, "bad magic, expected " + std::string(magic));
  }
  pos_ = 8;
  const std::uint32_t got = ReadU32();
  if (got != version) {
    throw Error(ErrorCode::kVersionMismatch,
                "format version " + std::to_string(got) + ", expected " +
                    std::to_string(version));
  }
}

std::uint32_t BinaryReader::ReadU32() {
  Need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
  }
  pos_ += 4;
  return v;
}

std::uint64_t BinaryReader::ReadU64() {
  Need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
  }
  pos_ += 8;
  return v;
}

double BinaryReader::ReadF64() { return std::bit_cast<double>(ReadU64()); }

void BinaryReader::ReadF64s(std::span<double> out) {
  Need(out.size() * 8);
  for (double& x : out) x = ReadF64();
}

std::string BinaryReader::ReadString() {
  const std::uint32_t n = ReadU32();
  Need(n);
  std::string s = bytes_.substr(pos_, n);
  pos_ += n;
  return s;
}

void BinaryReader::ExpectEnd() const {
  if (!AtEnd()) {
    throw Error(ErrorCode::kIoError, "trailing bytes after payload");
  }
}

std::uint64_t Fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string HexDigest(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string HashFile(const std::string& path) {
  return HexDigest(Fnv1a64(ReadFileToString(path)));
}

std::string ReadFileToString(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIoError, "read failed: " + path);
  return ss.str();
}

void WriteStringToFile(const std::string& path, std::string_view data) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(target.parent_path(), ec);
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw Error(ErrorCode::kIoError, "rename failed: " + path);
}

}  // namespace levdex
