#pragma once

#include <cstdint>

#include "voldiff/grid.hpp"
#include "voldiff/volume.hpp"

namespace voldiff {

// Piecewise-smooth ellipse phantom, normalized to [-1, 1].
// Background is exactly -1 (more than 30% of pixels), foreground is one
// large tissue ellipse with a smooth radial profile plus a few seeded
// interior ellipses. Slice index shrinks the geometry (ellipsoid cross
// sections); the volume index modulates intensities only, so the support
// mask is identical for every volume. Requires w, h >= 8, d >= 1, l >= 2.
// Deterministic in seed.
Volume4D make_phantom(int w, int h, int d, int l, std::uint64_t seed);

// Analytic masks for SNR/CNR derived from the same geometry: signal lies
// well inside the tissue ellipse at its most shrunk depth, background lies
// well outside the full-size ellipse. Disjoint and nonempty for w, h >= 16.
struct PhantomMasks {
    Mask signal;
    Mask background;
};

PhantomMasks phantom_masks(int w, int h);

}  // namespace voldiff
