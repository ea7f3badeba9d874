#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace tabprompt {

/// 64-bit FNV-1a. Stable across platforms and runs; used for prompt hashes,
/// config fingerprints and seeded per-text randomness.
constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t basis = 0xcbf29ce484222325ULL) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// splitmix64 finalizer; decorrelates nearby seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string to_hex(std::uint64_t value);

inline std::string hash_hex(std::string_view bytes) { return to_hex(fnv1a64(bytes)); }

}  // namespace tabprompt
