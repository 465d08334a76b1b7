#pragma once

#include <cstdint>
#include <random>

namespace popinfer {

using Rng = std::mt19937_64;

// Independent RNG streams hanging off a root seed. Every random quantity in a
// run is drawn from exactly one (stream, index) pair, so results do not depend
// on worker count or evaluation order.
enum class Stream : std::uint64_t {
  Init = 1,
  Train = 2,
  Heldout = 3,
  Test = 4,
  BatchSampler = 5,
  Dropout = 6,
  Pilot = 7,
  Abc = 8,
  Oracle = 9,
  Prior = 10,
};

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t root, Stream stream,
                                    std::uint64_t index) noexcept {
  const auto s = mix64(mix64(root) ^ mix64(static_cast<std::uint64_t>(stream) << 32));
  return mix64(s ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

inline Rng make_rng(std::uint64_t root, Stream stream, std::uint64_t index) {
  return Rng{derive_seed(root, stream, index)};
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>{0.0, 1.0}(rng);
}

}  // namespace popinfer
