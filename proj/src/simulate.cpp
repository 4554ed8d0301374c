#include "voldiff/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "voldiff/fft.hpp"
#include "voldiff/prng.hpp"

namespace voldiff {

NoiseKind parse_noise_kind(const std::string& name) {
    if (name == "image" || name == "image_gaussian") return NoiseKind::image_gaussian;
    if (name == "kspace" || name == "kspace_complex") return NoiseKind::kspace_complex;
    throw std::invalid_argument("unknown noise mode '" + name + "' (want image or kspace)");
}

std::string noise_kind_name(NoiseKind kind) {
    return kind == NoiseKind::image_gaussian ? "image_gaussian" : "kspace_complex";
}

SimulatedPair simulate_noise(const Volume4D& clean, double noise_std, NoiseKind mode,
                             std::uint64_t seed) {
    if (!(noise_std >= 0.0)) throw std::invalid_argument("simulate_noise: noise_std must be >= 0");
    if (clean.v.empty()) throw std::invalid_argument("simulate_noise: empty volume");
    if (mode == NoiseKind::kspace_complex &&
        (!is_power_of_two(clean.w) || !is_power_of_two(clean.h)))
        throw std::invalid_argument(
            "simulate_noise: kspace mode requires power-of-two w and h");

    SimulatedPair out;
    out.clean = clean;
    out.noisy = clean;
    out.noise_std = noise_std;
    out.mode = mode;

    Prng root(seed);
    if (mode == NoiseKind::image_gaussian) {
        for (int j = 0; j < clean.l; ++j) {
            Prng stream = root.split(1, static_cast<std::uint64_t>(j));
            const std::size_t base = clean.index(j, 0, 0, 0);
            const std::size_t n = static_cast<std::size_t>(clean.d) * clean.h * clean.w;
            for (std::size_t k = 0; k < n; ++k) {
                const double noisy =
                    static_cast<double>(clean.v[base + k]) + noise_std * stream.next_gaussian();
                out.noisy.v[base + k] = static_cast<float>(noisy);
            }
        }
        return out;
    }

    // k-space: shift into [0, 2] so magnitude reconstruction is meaningful,
    // perturb the spectrum, transform back, undo the shift.
    const double sigma_k = noise_std * std::sqrt(static_cast<double>(clean.w) * clean.h);
    for (int j = 0; j < clean.l; ++j) {
        for (int i = 0; i < clean.d; ++i) {
            Prng stream = root.split(2, static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(i));
            Grid slice = get_slice(clean, i, j);
            for (double& x : slice.v) x += 1.0;
            auto spectrum = dft2(slice);
            for (auto& z : spectrum)
                z += std::complex<double>(sigma_k * stream.next_gaussian(),
                                          sigma_k * stream.next_gaussian());
            Grid mag = idft2_magnitude(std::move(spectrum), clean.h, clean.w);
            for (double& x : mag.v) x -= 1.0;
            set_slice(out.noisy, i, j, mag);
        }
    }
    return out;
}

}  // namespace voldiff
