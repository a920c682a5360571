#pragma once

#include <cstdint>
#include <string_view>

namespace rgbdgeo {

// splitmix64 finalizer.
inline uint64_t MixSeed(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t CombineSeed(uint64_t a, uint64_t b) {
  return MixSeed(a ^ MixSeed(b));
}

// 64-bit FNV-1a. Stable across platforms and standard libraries, unlike
// std::hash.
inline uint64_t HashBytes(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Seed for one named work item (an image id, say) under a master seed.
inline uint64_t ItemSeed(uint64_t master, std::string_view item) {
  return CombineSeed(master, HashBytes(item));
}

}  // namespace rgbdgeo
