// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <random>

#include "drng/field.hpp"

namespace drng {

/// Deterministic random stream. mt19937_64 output is fixed by the standard,
/// and bounded draws use our own rejection sampler rather than
/// std::uniform_int_distribution (whose algorithm is implementation-defined),
/// so a seed reproduces the same draws on every toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [lo, hi], no modulo bias.
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t span = hi - lo;
    if (span == std::numeric_limits<std::uint64_t>::max()) return next_u64();
    const std::uint64_t range = span + 1;
    // Largest multiple of range that fits; draws at or above it are rejected.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % range + 1) % range;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v > limit);
    return lo + v % range;
  }

  template <std::size_t N>
  std::array<std::uint8_t, N> bytes() {
    std::array<std::uint8_t, N> out{};
    for (std::size_t i = 0; i < N; i += 8) {
      std::uint64_t v = next_u64();
      for (std::size_t k = 0; k < 8 && i + k < N; ++k) out[i + k] = static_cast<std::uint8_t>(v >> (56 - 8 * k));
    }
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

/// Uniform over [1, p-1].
inline FieldElement sample_nonzero(const FieldParams& field, Rng& rng) {
  return FieldElement(field, rng.uniform(1, field.p() - 1));
}

}  // namespace drng
