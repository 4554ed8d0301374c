#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace voldiff {

// Deterministic xoshiro256++ generator with splitmix64 seeding.
// Streams derived via split() depend only on the construction seed and the
// label tuple, never on how much of the parent stream was consumed, so
// per-slice / per-volume / per-step work can be reordered or parallelized
// without changing any draw.
class Prng {
public:
    explicit Prng(std::uint64_t seed);

    // Independent stream addressed by up to four integer labels.
    Prng split(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0,
               std::uint64_t d = 0) const;

    std::uint64_t next_u64();

    // Uniform in [0, 1), 53-bit resolution.
    double next_double();

    // Standard normal via Box-Muller (second value cached).
    double next_gaussian();

    // Unbiased uniform integer in [0, n), n >= 1.
    std::uint64_t next_below(std::uint64_t n);

    // Fisher-Yates shuffle.
    void shuffle(std::vector<double>& v);

    std::uint64_t seed() const { return root_; }

private:
    std::array<std::uint64_t, 4> s_{};
    std::uint64_t root_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace voldiff
