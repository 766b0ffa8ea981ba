#pragma once
// Counter-based uniform stream: u(step, id) is a pure function of
// (seed, step, id), so results do not depend on thread count or
// iteration order.

#include <cstdint>

namespace neuropop {

inline std::uint64_t splitmix64_fin(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

struct CounterRng {
  std::uint64_t seed = 0;

  std::uint64_t bits(std::uint64_t step, std::uint64_t id) const {
    std::uint64_t z = splitmix64_fin(seed + 0x9e3779b97f4a7c15ull * (step + 1));
    z = splitmix64_fin(z + 0x9e3779b97f4a7c15ull * (id + 1));
    return z;
  }

  // uniform in [0, 1)
  double uniform(std::uint64_t step, std::uint64_t id) const {
    return static_cast<double>(bits(step, id) >> 11) * 0x1.0p-53;
  }
};

}  // namespace neuropop
