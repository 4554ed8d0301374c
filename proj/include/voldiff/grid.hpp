#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace voldiff {

// Dense row-major 2D array of doubles.
struct Grid {
    int h = 0;
    int w = 0;
    std::vector<double> v;

    Grid() = default;
    Grid(int h_, int w_, double fill = 0.0)
        : h(h_), w(w_), v(static_cast<std::size_t>(h_) * static_cast<std::size_t>(w_), fill) {}

    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * w + c]; }
    double at(int r, int c) const { return v[static_cast<std::size_t>(r) * w + c]; }
    std::size_t size() const { return v.size(); }
    bool same_shape(const Grid& o) const { return h == o.h && w == o.w; }
};

// Boolean pixel mask with grid shape.
struct Mask {
    int h = 0;
    int w = 0;
    std::vector<std::uint8_t> m;

    Mask() = default;
    Mask(int h_, int w_)
        : h(h_), w(w_), m(static_cast<std::size_t>(h_) * static_cast<std::size_t>(w_), 0) {}

    std::uint8_t& at(int r, int c) { return m[static_cast<std::size_t>(r) * w + c]; }
    std::uint8_t at(int r, int c) const { return m[static_cast<std::size_t>(r) * w + c]; }
    std::size_t count() const;
};

// Compensated (Kahan) summation; order-stable and accurate for the
// zero-mean / variance-preservation contracts.
double kahan_sum(const std::vector<double>& v);
double mean_of(const std::vector<double>& v);
// Population variance (divide by N), two-pass with compensated sums.
double population_variance(const std::vector<double>& v);

}  // namespace voldiff
