#pragma once

// Splittable seed derivation.
//
// A child seed is the SplitMix64 chain of the master seed mixed with each
// coordinate in turn, so (master, coordinates) -> seed is a pure function and
// independent units (nodes, sweep cells, Monte-Carlo chunks) draw from
// unrelated streams no matter which worker runs them.

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace panda {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> coords) {
  std::uint64_t h = splitmix64(master);
  for (auto c : coords) {
    h = splitmix64(h ^ splitmix64(c + 0x632BE59BD9B4E019ULL));
  }
  return h;
}

/// Quantises a real-valued coordinate (e.g. a budget in mW) to micro-units
/// so it can take part in seed derivation.
inline std::uint64_t seed_coordinate(double value) {
  return static_cast<std::uint64_t>(std::llround(value * 1e6));
}

}  // namespace panda
