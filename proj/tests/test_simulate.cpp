#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "voldiff/grid.hpp"
#include "voldiff/phantom.hpp"
#include "voldiff/simulate.hpp"

using namespace voldiff;

namespace {

std::vector<double> volume_noise(const SimulatedPair& p, int j) {
    std::vector<double> n;
    n.reserve(static_cast<std::size_t>(p.clean.d) * p.clean.h * p.clean.w);
    for (int i = 0; i < p.clean.d; ++i)
        for (int r = 0; r < p.clean.h; ++r)
            for (int c = 0; c < p.clean.w; ++c)
                n.push_back(static_cast<double>(p.noisy.at(j, i, r, c)) -
                            static_cast<double>(p.clean.at(j, i, r, c)));
    return n;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = mean_of(a), mb = mean_of(b);
    double num = 0.0, da = 0.0, db = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        da += (a[i] - ma) * (a[i] - ma);
        db += (b[i] - mb) * (b[i] - mb);
    }
    return num / std::sqrt(da * db);
}

}  // namespace

TEST_CASE("noise mode parsing") {
    CHECK(parse_noise_kind("image") == NoiseKind::image_gaussian);
    CHECK(parse_noise_kind("image_gaussian") == NoiseKind::image_gaussian);
    CHECK(parse_noise_kind("kspace") == NoiseKind::kspace_complex);
    CHECK(parse_noise_kind("kspace_complex") == NoiseKind::kspace_complex);
    CHECK_THROWS_AS(parse_noise_kind("fourier"), std::invalid_argument);
    CHECK(noise_kind_name(NoiseKind::image_gaussian) == "image_gaussian");
    CHECK(noise_kind_name(NoiseKind::kspace_complex) == "kspace_complex");
}

TEST_CASE("zero noise is the identity") {
    Volume4D clean = make_phantom(16, 16, 2, 2, 3);
    SimulatedPair img = simulate_noise(clean, 0.0, NoiseKind::image_gaussian, 5);
    CHECK(std::memcmp(img.noisy.v.data(), clean.v.data(), clean.v.size() * sizeof(float)) == 0);

    SimulatedPair ksp = simulate_noise(clean, 0.0, NoiseKind::kspace_complex, 5);
    for (std::size_t i = 0; i < clean.v.size(); ++i)
        CHECK(std::fabs(static_cast<double>(ksp.noisy.v[i]) - static_cast<double>(clean.v[i])) <
              1e-6);  // f32 storage on top of the 1e-9 transform round trip
}

TEST_CASE("image noise has the requested scale and zero mean") {
    Volume4D clean = make_phantom(32, 32, 4, 4, 7);
    const double sigma = 0.2;
    SimulatedPair p = simulate_noise(clean, sigma, NoiseKind::image_gaussian, 11);
    CHECK(p.noise_std == sigma);
    CHECK(p.mode == NoiseKind::image_gaussian);

    std::vector<double> all;
    for (int j = 0; j < clean.l; ++j) {
        std::vector<double> n = volume_noise(p, j);
        all.insert(all.end(), n.begin(), n.end());
    }
    const double n = static_cast<double>(all.size());
    const double mean = mean_of(all);
    const double sd = std::sqrt(population_variance(all));
    CHECK(std::fabs(sd - sigma) < 0.05 * sigma);
    CHECK(std::fabs(mean) < 3.0 * sigma / std::sqrt(n));
}

TEST_CASE("noise fields of adjacent volumes are uncorrelated") {
    Volume4D clean = make_phantom(32, 32, 4, 4, 7);
    SimulatedPair p = simulate_noise(clean, 0.2, NoiseKind::image_gaussian, 11);
    for (int j = 0; j < clean.l; ++j) {
        double r = correlation(volume_noise(p, j), volume_noise(p, (j + 1) % clean.l));
        CHECK(std::fabs(r) < 0.05);
    }
}

TEST_CASE("simulation is deterministic in the seed") {
    Volume4D clean = make_phantom(16, 16, 2, 2, 3);
    SimulatedPair a = simulate_noise(clean, 0.3, NoiseKind::image_gaussian, 21);
    SimulatedPair b = simulate_noise(clean, 0.3, NoiseKind::image_gaussian, 21);
    CHECK(std::memcmp(a.noisy.v.data(), b.noisy.v.data(), clean.v.size() * sizeof(float)) == 0);
    SimulatedPair c = simulate_noise(clean, 0.3, NoiseKind::image_gaussian, 22);
    CHECK(std::memcmp(a.noisy.v.data(), c.noisy.v.data(), clean.v.size() * sizeof(float)) != 0);
}

TEST_CASE("kspace noise lands near the requested image-domain scale") {
    Volume4D clean = make_phantom(32, 32, 4, 4, 7);
    const double sigma = 0.1;
    SimulatedPair p = simulate_noise(clean, sigma, NoiseKind::kspace_complex, 13);
    std::vector<double> all;
    for (int j = 0; j < clean.l; ++j) {
        std::vector<double> n = volume_noise(p, j);
        all.insert(all.end(), n.begin(), n.end());
    }
    const double sd = std::sqrt(population_variance(all));
    // magnitude reconstruction folds the two complex components and clips at
    // the |.| kink, so allow a loose band around sigma
    CHECK(sd > 0.8 * sigma);
    CHECK(sd < 2.0 * sigma);

    // magnitude reconstruction carries a deterministic bias that tracks the
    // local signal, so pixel-aligned residuals correlate moderately (~0.3)
    // even with independent draws; stream reuse would push this to ~1
    auto resid = [&](int j, int i) {
        std::vector<double> s;
        for (int r = 0; r < clean.h; ++r)
            for (int c = 0; c < clean.w; ++c)
                s.push_back(static_cast<double>(p.noisy.at(j, i, r, c)) - clean.at(j, i, r, c));
        return s;
    };
    const std::vector<double> v0s0 = resid(0, 0), v0s1 = resid(0, 1), v1s0 = resid(1, 0);
    CHECK(v0s0 != v0s1);
    CHECK(v0s0 != v1s0);
    CHECK(std::fabs(correlation(v0s0, v0s1)) < 0.6);  // across slices
    CHECK(std::fabs(correlation(v0s0, v1s0)) < 0.6);  // across volumes
}

TEST_CASE("kspace mode rejects non-power-of-two dims") {
    Volume4D odd = make_phantom(33, 32, 2, 2, 3);
    CHECK_THROWS_AS(simulate_noise(odd, 0.1, NoiseKind::kspace_complex, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate_noise(odd, -0.1, NoiseKind::image_gaussian, 1),
                    std::invalid_argument);
}
