#include "voldiff/phantom.hpp"

#include <cmath>
#include <stdexcept>

#include "voldiff/prng.hpp"

namespace voldiff {

namespace {

// Geometry lives in "tissue coordinates" q = (u/A, v/B) where (u, v) spans
// [-1, 1]^2 over the image; the tissue boundary is |q| = depth_scale.
constexpr double kAxisU = 0.72;
constexpr double kAxisV = 0.68;
constexpr double kMinDepthScale = 0.78;

double depth_scale(int i, int d) {
    if (d == 1) return 1.0;
    return kMinDepthScale + (1.0 - kMinDepthScale) * std::sin(M_PI * (i + 0.5) / d);
}

struct Blob {
    double cx, cy;      // center in tissue coordinates
    double a, b;        // semi-axes in tissue coordinates
    double cos_t, sin_t;
    double amp;
    double phase;
};

}  // namespace

Volume4D make_phantom(int w, int h, int d, int l, std::uint64_t seed) {
    if (w < 8 || h < 8) throw std::invalid_argument("make_phantom: w and h must be >= 8");
    if (d < 1) throw std::invalid_argument("make_phantom: d must be >= 1");
    if (l < 2) throw std::invalid_argument("make_phantom: l must be >= 2 (paired volumes)");

    Prng rng(seed);
    Prng geo = rng.split(1);
    constexpr int kBlobs = 3;
    Blob blobs[kBlobs];
    for (auto& bl : blobs) {
        const double ang = 2.0 * M_PI * geo.next_double();
        const double rad = 0.40 * geo.next_double();
        bl.cx = rad * std::cos(ang);
        bl.cy = rad * std::sin(ang);
        bl.a = 0.12 + 0.18 * geo.next_double();
        bl.b = 0.12 + 0.18 * geo.next_double();
        const double rot = M_PI * geo.next_double();
        bl.cos_t = std::cos(rot);
        bl.sin_t = std::sin(rot);
        bl.amp = 0.12 + 0.20 * geo.next_double();
        bl.phase = 2.0 * M_PI * geo.next_double();
    }
    const double base_phase = 2.0 * M_PI * rng.split(2).next_double();

    Volume4D vol(w, h, d, l);
    for (int j = 0; j < l; ++j) {
        const double base_mod = 0.75 + 0.25 * std::cos(2.0 * M_PI * j / l + base_phase);
        for (int i = 0; i < d; ++i) {
            const double s = depth_scale(i, d);
            for (int r = 0; r < h; ++r) {
                const double v = ((r + 0.5) / h) * 2.0 - 1.0;
                for (int c = 0; c < w; ++c) {
                    const double u = ((c + 0.5) / w) * 2.0 - 1.0;
                    const double qx = u / kAxisU;
                    const double qy = v / kAxisV;
                    const double rr = (qx * qx + qy * qy) / (s * s);
                    double val = 0.0;
                    if (rr <= 1.0) {
                        val = 0.55 * (1.0 - 0.30 * rr) * base_mod;
                        for (const auto& bl : blobs) {
                            const double dx = qx - s * bl.cx;
                            const double dy = qy - s * bl.cy;
                            const double ex = (dx * bl.cos_t + dy * bl.sin_t) / (s * bl.a);
                            const double ey = (-dx * bl.sin_t + dy * bl.cos_t) / (s * bl.b);
                            if (ex * ex + ey * ey <= 1.0) {
                                const double mod =
                                    0.75 + 0.25 * std::cos(2.0 * M_PI * j / l + bl.phase);
                                val += bl.amp * mod;
                            }
                        }
                    }
                    vol.at(j, i, r, c) = static_cast<float>(val);
                }
            }
        }
    }
    normalize_volume(vol);
    return vol;
}

PhantomMasks phantom_masks(int w, int h) {
    if (w < 16 || h < 16) throw std::invalid_argument("phantom_masks: w and h must be >= 16");
    PhantomMasks masks;
    masks.signal = Mask(h, w);
    masks.background = Mask(h, w);
    const double signal_radius = kMinDepthScale * 0.8;
    for (int r = 0; r < h; ++r) {
        const double v = ((r + 0.5) / h) * 2.0 - 1.0;
        for (int c = 0; c < w; ++c) {
            const double u = ((c + 0.5) / w) * 2.0 - 1.0;
            const double qx = u / kAxisU;
            const double qy = v / kAxisV;
            const double rr = std::sqrt(qx * qx + qy * qy);
            if (rr <= signal_radius) masks.signal.at(r, c) = 1;
            if (rr >= 1.15) masks.background.at(r, c) = 1;
        }
    }
    if (masks.signal.count() == 0 || masks.background.count() == 0)
        throw std::invalid_argument("phantom_masks: degenerate masks for these dimensions");
    return masks;
}

}  // namespace voldiff
