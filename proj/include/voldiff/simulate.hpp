#pragma once

#include <cstdint>
#include <string>

#include "voldiff/volume.hpp"

namespace voldiff {

enum class NoiseKind {
    image_gaussian,  // i.i.d. Gaussian added per voxel
    kspace_complex,  // complex Gaussian added to the 2D spectrum, magnitude back
};

NoiseKind parse_noise_kind(const std::string& name);
std::string noise_kind_name(NoiseKind kind);

struct SimulatedPair {
    Volume4D clean;
    Volume4D noisy;
    double noise_std = 0.0;
    NoiseKind mode = NoiseKind::image_gaussian;
};

// Noise fields are independent across volumes (and across slices in k-space
// mode): each gets its own split of the seed. k-space mode requires
// power-of-two w and h; the slice is shifted by +1 into [0, 2] before the
// forward transform, per-bin complex noise of std noise_std*sqrt(w*h) is
// added (so the image-domain perturbation has std ~ noise_std), then the
// magnitude of the inverse transform is shifted back by -1.
SimulatedPair simulate_noise(const Volume4D& clean, double noise_std, NoiseKind mode,
                             std::uint64_t seed);

}  // namespace voldiff
