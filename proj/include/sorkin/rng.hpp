#pragma once

#include <cstdint>
#include <random>

namespace sorkin::rng {

// All randomness descends from one master seed. A draw site is identified by
// (stream, index); its engine is seeded with
//   splitmix64(splitmix64(master ^ (stream * golden)) + index)
// so results never depend on thread scheduling.

enum class Stream : std::uint64_t {
  cycle_noise = 1,
  phase_drift = 2,
  monte_carlo = 3,
  fixture = 4,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                                    std::uint64_t index) noexcept {
  const auto s = static_cast<std::uint64_t>(stream);
  return splitmix64(splitmix64(master ^ (s * 0x9E3779B97F4A7C15ull)) + index);
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t master, Stream stream, std::uint64_t index) {
  return Engine(derive_seed(master, stream, index));
}

}  // namespace sorkin::rng
