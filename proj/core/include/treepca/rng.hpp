#pragma once
// Splittable counter-based random number generator.
//
// Streams are identified by a 64-bit key derived from (seed, label); drawing
// the i-th variate of a stream only depends on (key, i), so independently
// labelled streams can be consumed in any order without affecting each other.
// This is what makes runs reproducible per (seed, node) while leaving the
// traversal order of the algorithm free.

#include <cstdint>
#include <string_view>

namespace treepca {

namespace detail {

// splitmix64 finalizer; statistically solid for keyed counter sequences.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

class RngStream {
 public:
  RngStream() : key_(0), ctr_(0) {}
  explicit RngStream(std::uint64_t seed) : key_(detail::mix64(seed)), ctr_(0) {}

  // Derives an independent stream; the child's sequence is a pure function of
  // (parent key, label), never of how much the parent has been consumed.
  RngStream split(std::string_view label) const {
    RngStream s;
    s.key_ = detail::mix64(key_ ^ detail::fnv1a(label));
    s.ctr_ = 0;
    return s;
  }

  std::uint64_t next_u64() { return detail::mix64(key_ + (ctr_++) * 0x9e3779b97f4a7c15ULL); }

  // Uniform on [0,1) with 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1]; safe as a log() argument.
  double next_double_open() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  // Standard normal via Box-Muller on two fresh counters. The second variate
  // of the pair is discarded so the draw count per call is fixed.
  double next_gaussian();

 private:
  std::uint64_t key_;
  std::uint64_t ctr_;
};

}  // namespace treepca
