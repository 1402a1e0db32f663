#pragma once

#include <cmath>
#include <cstdint>

// Counter-based generator: output depends only on (seed, counter), so every
// consumer derives its randomness from one seed and a position, independent
// of evaluation order or worker count.

namespace impfac {

class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t counter = 0) : seed_(seed), counter_(counter) {}

    std::uint64_t next_u64() {
        std::uint64_t z = seed_ + counter_ * 0x9E3779B97F4A7C15ULL;
        ++counter_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller, fixed two-draw consumption (no rejection loop).
    double normal() {
        const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Independent stream for a named sub-task of the same seed.
    Rng stream(std::uint64_t stream_id) const { return Rng(seed_ ^ (0xD1342543DE82EF95ULL * (stream_id + 1)), 0); }

    std::uint64_t seed() const { return seed_; }

  private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

}  // namespace impfac
