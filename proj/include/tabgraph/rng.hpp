#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace tabgraph {

// FNV-1a, the stable 64-bit text hash used for embedder seeding and for
// splitting the corpus seed per table id.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Counter-based generator (splitmix64). Small state, splittable, identical
// output on every platform.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe as a log() argument.
  double next_double_open() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (cosine branch only, one draw per call).
  double next_normal() {
    double u1 = next_double_open();
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Uniform in [-bound, bound].
  double next_uniform(double bound) { return (2.0 * next_double() - 1.0) * bound; }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return n ? next_u64() % n : 0; }
};

// Per-table substream: hash the table id into the corpus seed so parallel
// and serial generation orders produce identical output.
inline SplitMix64 table_stream(std::uint64_t corpus_seed, std::string_view table_id) {
  return SplitMix64(corpus_seed ^ fnv1a64(table_id));
}

}  // namespace tabgraph
