#include "voldiff/prng.hpp"

#include <cmath>
#include <stdexcept>

namespace voldiff {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

Prng::Prng(std::uint64_t seed) : root_(seed) {
    std::uint64_t x = seed;
    for (auto& s : s_) s = splitmix64(x);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

Prng Prng::split(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) const {
    std::uint64_t x = root_;
    std::uint64_t h = splitmix64(x);
    for (std::uint64_t label : {a, b, c, d}) {
        x ^= label;
        h ^= splitmix64(x);
    }
    return Prng(h);
}

std::uint64_t Prng::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Prng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Prng::next_gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

std::uint64_t Prng::next_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Prng::next_below: n must be >= 1");
    // Lemire's unbiased multiply-shift rejection.
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (lo < threshold) {
            m = static_cast<unsigned __int128>(next_u64()) * n;
            lo = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

void Prng::shuffle(std::vector<double>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = next_below(i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace voldiff
