#pragma once

#include <cstdint>
#include <random>

namespace shiftscope {

using Engine = std::mt19937_64;

/// Seed plus stream id. Sub-streams are derived by hashing, so every
/// (run, sample, role) gets an independent generator regardless of the
/// order in which work is scheduled.
struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  /// Independent child stream identified by `tag`.
  RngSeed child(std::uint64_t tag) const noexcept;
  RngSeed child(std::uint64_t a, std::uint64_t b) const noexcept { return child(a).child(b); }

  Engine engine() const;

  friend bool operator==(const RngSeed&, const RngSeed&) = default;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace shiftscope
