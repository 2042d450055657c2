#include "udsub/rng.hpp"

namespace udsub {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngConfig RngConfig::derive(std::uint64_t k) const {
  return RngConfig{seed, splitmix64(stream_id ^ splitmix64(k + 0x632be59bd9b4e019ULL))};
}

Engine RngConfig::engine() const {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(stream_id + 0x3c6ef372fe94f82aULL);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Engine(seq);
}

double uniform_open01(Engine& eng) {
  // 53 random bits, offset by half an ulp so 0 is unreachable.
  const std::uint64_t bits = eng() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace udsub
