#pragma once

#include <complex>
#include <vector>

#include "voldiff/grid.hpp"

namespace voldiff {

// In-place radix-2 Cooley-Tukey transform; n must be a power of two.
// Forward is unnormalized; inverse applies the 1/n factor.
void fft_pow2(std::complex<double>* a, std::size_t n, bool inverse);

// 2D transform of an h x w row-major buffer (rows first, then columns).
// Both dimensions must be powers of two. Inverse applies 1/(h*w) in total.
void fft2(std::vector<std::complex<double>>& data, int h, int w, bool inverse);

std::vector<std::complex<double>> dft2(const Grid& g);
Grid idft2_magnitude(std::vector<std::complex<double>> data, int h, int w);

bool is_power_of_two(int n);

}  // namespace voldiff
