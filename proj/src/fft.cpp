#include "voldiff/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace voldiff {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void fft_pow2(std::complex<double>* a, std::size_t n, bool inverse) {
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft_pow2: length must be a power of two");
    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * M_PI / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> even = a[i + k];
                const std::complex<double> odd = a[i + k + len / 2] * w;
                a[i + k] = even + odd;
                a[i + k + len / 2] = even - odd;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) a[i] *= scale;
    }
}

void fft2(std::vector<std::complex<double>>& data, int h, int w, bool inverse) {
    if (!is_power_of_two(h) || !is_power_of_two(w))
        throw std::invalid_argument("fft2: both dimensions must be powers of two");
    if (data.size() != static_cast<std::size_t>(h) * w)
        throw std::invalid_argument("fft2: buffer size does not match dimensions");
    for (int r = 0; r < h; ++r) fft_pow2(data.data() + static_cast<std::size_t>(r) * w, w, inverse);
    std::vector<std::complex<double>> col(h);
    for (int c = 0; c < w; ++c) {
        for (int r = 0; r < h; ++r) col[r] = data[static_cast<std::size_t>(r) * w + c];
        fft_pow2(col.data(), h, inverse);
        for (int r = 0; r < h; ++r) data[static_cast<std::size_t>(r) * w + c] = col[r];
    }
}

std::vector<std::complex<double>> dft2(const Grid& g) {
    std::vector<std::complex<double>> data(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) data[i] = {g.v[i], 0.0};
    fft2(data, g.h, g.w, false);
    return data;
}

Grid idft2_magnitude(std::vector<std::complex<double>> data, int h, int w) {
    fft2(data, h, w, true);
    Grid g(h, w);
    for (std::size_t i = 0; i < g.size(); ++i) g.v[i] = std::abs(data[i]);
    return g;
}

}  // namespace voldiff
