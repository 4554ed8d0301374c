#pragma once

#include "voldiff/grid.hpp"
#include "voldiff/prng.hpp"
#include "voldiff/volume.hpp"

namespace voldiff {

// Spatially shuffled zero-mean residual xi = shuffle((x - x') - mean(x - x')).
// The shuffle permutes values only, so the multiset of xi equals the multiset
// of centered residuals exactly and the variance of (x - x') is preserved.
struct DiNoise {
    Grid xi;
    double source_mean = 0.0;  // mean(x - x') before centering
};

DiNoise di_noise(const SlicePair& pair, Prng& rng);

// Permute the existing values again with a fresh stream.
void reshuffle(DiNoise& noise, Prng& rng);

}  // namespace voldiff
