//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLR_HASH_H_
#define MOLR_HASH_H_

#include <cstdint>
#include <span>
#include <string_view>

namespace molr {

// Pinned seed mixed into every fingerprint hash.
inline constexpr std::uint64_t kHashSeed = 0x6d6f6c722d667021ULL;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a over the little-endian bytes of each word, starting from the FNV
// offset basis xor `seed`, followed by mix64 so that low bits are usable for
// modulo folding. Platform independent.
constexpr std::uint64_t hash_words(std::span<const std::uint64_t> words,
                                   std::uint64_t seed = kHashSeed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (std::uint64_t w: words) {
    for (int b = 0; b < 8; ++b) {
      h ^= (w >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return mix64(h);
}

constexpr std::uint64_t hash_string(std::string_view s,
                                    std::uint64_t seed = kHashSeed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (char c: s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

}  // namespace molr

#endif  // MOLR_HASH_H_
