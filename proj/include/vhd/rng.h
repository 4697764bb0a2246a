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

#ifndef VHD_RNG_H_
#define VHD_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace vhd {

using Rng = std::mt19937_64;

// Derives an independent stream seed from a root seed and a component tag,
// e.g. derive_seed(seed, "init"). Each component draws from its own stream so
// that changing how one component consumes randomness leaves the others
// untouched.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  // splitmix64 finalizer over the combination.
  std::uint64_t z = root + 0x9e3779b97f4a7c15ULL * (h | 1ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t root, std::string_view tag) {
  return Rng(derive_seed(root, tag));
}

}  // namespace vhd

#endif  // VHD_RNG_H_
