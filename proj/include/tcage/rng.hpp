#pragma once

#include <cstdint>
#include <cmath>
#include <optional>

namespace tcage {

// splitmix64 finalizer; used to derive independent seed streams.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Documented seed-split function: stream (a, b) of a base seed. All
// per-planet / per-tree / per-fold RNG streams come from here, so results
// are independent of evaluation order and thread count.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    return mix64(mix64(base ^ 0xD1B54A32D192ED03ULL) ^ mix64(a + 0x8CB92BA72F3D8DD7ULL) ^ mix64(b + 0x2545F4914F6CDD1DULL));
}

// Small xoshiro256**-free PRNG built on splitmix64 state stepping.
// Hand-rolled uniform/normal conversions keep the byte streams identical
// across platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(mix64(seed ^ 0xA0761D6478BD642FULL)) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // uniform integer in [0, n)
    std::uint64_t uniform_index(std::uint64_t n) {
        return next_u64() % n;
    }

    // standard normal via Box-Muller
    double normal() {
        if (spare_) {
            double v = *spare_;
            spare_.reset();
            return v;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    std::optional<double> spare_;
};

}  // namespace tcage
