#pragma once

#include <cstdint>
#include <random>

namespace udsub {

using Engine = std::mt19937_64;

/// Seed material for every stochastic operation. Two configs with the same
/// (seed, stream_id) produce bit-identical draws on the same build.
struct RngConfig {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  /// Child stream for replication `k`; children of distinct k never share state.
  [[nodiscard]] RngConfig derive(std::uint64_t k) const;

  [[nodiscard]] Engine engine() const;

  friend bool operator==(const RngConfig&, const RngConfig&) = default;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Uniform draw on the open interval (0, 1).
double uniform_open01(Engine& eng);

}  // namespace udsub
