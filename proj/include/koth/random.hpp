#pragma once

#include <cstdint>
#include <random>

namespace koth {

/// Independent per-game random streams. Each consumer draws from its own
/// stream so that changes in one consumer never shift another's draws.
enum class Stream : std::uint32_t { Frequencies = 0, Phases = 1, Positions = 2 };

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, Stream stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), 0x6b6f7468u};
    engine_.seed(seq);
  }

  /// Uniform on [0, 1) with 53 random bits; identical on every platform.
  double canonical() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * canonical(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace koth
