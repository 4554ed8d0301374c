#include "voldiff/di_noise.hpp"

#include <stdexcept>

namespace voldiff {

DiNoise di_noise(const SlicePair& pair, Prng& rng) {
    if (!pair.x.same_shape(pair.x_prime))
        throw std::invalid_argument("di_noise: pair slices have different shapes");
    if (pair.x.v.empty()) throw std::invalid_argument("di_noise: empty slices");

    DiNoise out;
    out.xi = Grid(pair.x.h, pair.x.w);
    for (std::size_t i = 0; i < pair.x.size(); ++i)
        out.xi.v[i] = pair.x.v[i] - pair.x_prime.v[i];
    out.source_mean = mean_of(out.xi.v);
    for (double& x : out.xi.v) x -= out.source_mean;
    rng.shuffle(out.xi.v);
    return out;
}

void reshuffle(DiNoise& noise, Prng& rng) { rng.shuffle(noise.xi.v); }

}  // namespace voldiff
