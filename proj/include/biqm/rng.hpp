#pragma once

#include <cstdint>

namespace biqm {

// SplitMix64 (Steele, Lea, Flood 2014) used as a counter-based generator:
// the i-th output is mix(seed + (i+1) * 0x9e3779b97f4a7c15), where
//   z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
//   z = (z ^ (z >> 27)) * 0x94d049bb133111eb
//   z =  z ^ (z >> 31)
// Uniform doubles take the top 53 bits: (x >> 11) * 2^-53, range [0, 1).
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64();
    double uniform();
    // Uniform integer in [0, bound) by rejection; bound > 0.
    std::uint64_t below(std::uint64_t bound);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t counter() const noexcept { return counter_; }

    static std::uint64_t mix(std::uint64_t z);

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

}  // namespace biqm
