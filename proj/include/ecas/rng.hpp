#pragma once

#include <cstdint>
#include <random>

namespace ecas {

// Seeded generator with a fixed bits-to-double mapping, so identical seeds
// give identical streams on every platform (std::uniform_real_distribution
// is implementation-defined).
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ecas
