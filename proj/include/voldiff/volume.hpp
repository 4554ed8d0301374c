#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "voldiff/grid.hpp"

namespace voldiff {

// 4D stack of l volumes, each d slices of h x w pixels, stored as f32
// (the on-disk dtype). Flat layout: ((j*d + i)*h + r)*w + c with j the
// volume index and i the slice index.
struct Volume4D {
    int w = 0;
    int h = 0;
    int d = 0;
    int l = 0;
    bool normalized = false;
    std::vector<float> v;

    Volume4D() = default;
    Volume4D(int w_, int h_, int d_, int l_);

    std::size_t index(int j, int i, int r, int c) const {
        return ((static_cast<std::size_t>(j) * d + i) * h + r) * w + c;
    }
    float& at(int j, int i, int r, int c) { return v[index(j, i, r, c)]; }
    float at(int j, int i, int r, int c) const { return v[index(j, i, r, c)]; }
    std::size_t size() const { return v.size(); }
};

struct DfvHeader {
    int w = 0, h = 0, d = 0, l = 0;
    bool normalized = false;
};

// Container: one UTF-8 JSON header line
//   {"magic":"DFV1","w":W,"h":H,"d":D,"l":L,"dtype":"f32le","normalized":B}
// terminated by '\n', followed by w*h*d*l little-endian f32 values.
DfvHeader parse_dfv_header(const std::string& line);
Volume4D load_dfv(const std::string& path);
void save_dfv(const Volume4D& vol, const std::string& path);

// Global affine map of the whole 4D array onto [-1, 1]; min maps to -1 and
// max to +1 exactly. Throws on a constant volume.
void normalize_volume(Volume4D& vol);

Grid get_slice(const Volume4D& vol, int slice, int volume);
void set_slice(Volume4D& vol, int slice, int volume, const Grid& g);

// x is slice i of volume j; x_prime is the same slice of volume (j-1),
// wrapping to l-1 at j = 0. Requires l >= 2.
struct SlicePair {
    Grid x;
    Grid x_prime;
    int slice = 0;
    int volume = 0;
};

SlicePair slice_pair(const Volume4D& vol, int slice, int volume);

// 8-bit binary PGM (P5, maxval 255); values mapped linearly from [lo, hi]
// and clamped.
void write_pgm(const Grid& g, const std::string& path, double lo = -1.0, double hi = 1.0);

}  // namespace voldiff
