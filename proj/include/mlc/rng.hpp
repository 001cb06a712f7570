#pragma once

#include <cstdint>

namespace mlc {

/// splitmix64 step.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed from a master seed and a task index.
/// Parallel work items draw from derived seeds keyed by their slot, so the
/// output never depends on thread scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master ^ (0x9E3779B97F4A7C15ull * (index + 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return a ^ (b << 1) ^ (b >> 63);
}

}  // namespace mlc
