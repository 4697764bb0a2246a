// Copyright 2026 The vhd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VHD_BINARY_IO_H_
#define VHD_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "vhd/error.h"

// Little-endian primitives shared by the checkpoint and feature formats.
namespace vhd::binary {

inline void write_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff),
                         static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff),
                         static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

inline void write_f32(std::ostream& out, float v) {
  write_u32(out, std::bit_cast<std::uint32_t>(v));
}

inline void write_magic(std::ostream& out, const char (&magic)[5]) {
  out.write(magic, 4);
}

// Reads exactly n bytes or throws a truncation error mentioning `what`.
inline void read_exact(std::istream& in, char* dst, std::size_t n,
                       const std::string& what) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw FormatError(FormatError::Kind::kTruncated,
                      "truncated input while reading " + what);
  }
}

inline std::uint32_t read_u32(std::istream& in, const std::string& what) {
  unsigned char b[4];
  read_exact(in, reinterpret_cast<char*>(b), 4, what);
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

inline float read_f32(std::istream& in, const std::string& what) {
  return std::bit_cast<float>(read_u32(in, what));
}

inline void expect_magic(std::istream& in, const char (&magic)[5],
                         const std::string& path) {
  char got[4];
  read_exact(in, got, 4, "magic of " + path);
  if (std::memcmp(got, magic, 4) != 0) {
    throw FormatError(FormatError::Kind::kBadMagic,
                      path + ": bad magic, expected " + std::string(magic));
  }
}

}  // namespace vhd::binary

#endif  // VHD_BINARY_IO_H_
