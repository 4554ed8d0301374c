#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "voldiff/di_noise.hpp"
#include "voldiff/phantom.hpp"
#include "voldiff/simulate.hpp"

using namespace voldiff;

namespace {

SlicePair noisy_pair(int seed) {
    Volume4D clean = make_phantom(32, 32, 2, 4, 7);
    SimulatedPair sim = simulate_noise(clean, 0.2, NoiseKind::image_gaussian, seed);
    return slice_pair(sim.noisy, 1, 2);
}

std::vector<double> centered_diff(const SlicePair& pair, double* mean_out = nullptr) {
    std::vector<double> diff(pair.x.v.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = pair.x.v[i] - pair.x_prime.v[i];
    const double mu = mean_of(diff);
    if (mean_out) *mean_out = mu;
    for (double& d : diff) d -= mu;
    return diff;
}

}  // namespace

TEST_CASE("identical measurements give exactly zero noise") {
    SlicePair pair;
    pair.x = Grid(8, 8);
    pair.x_prime = Grid(8, 8);
    for (std::size_t i = 0; i < pair.x.v.size(); ++i)
        pair.x.v[i] = pair.x_prime.v[i] = 0.01 * static_cast<double>(i) - 0.3;
    Prng rng(1);
    DiNoise n = di_noise(pair, rng);
    CHECK(n.source_mean == 0.0);
    for (double v : n.xi.v) CHECK(v == 0.0);
}

TEST_CASE("a constant offset is absorbed exactly") {
    SlicePair pair;
    pair.x = Grid(16, 16);
    pair.x_prime = Grid(16, 16);
    for (std::size_t i = 0; i < pair.x.v.size(); ++i) {
        // float-representable values so x - x' is bitwise 0.5 everywhere
        const double base = static_cast<double>(static_cast<float>(0.03125 * (i % 23) - 0.25));
        pair.x_prime.v[i] = base;
        pair.x.v[i] = base + 0.5;
    }
    Prng rng(2);
    DiNoise n = di_noise(pair, rng);
    CHECK(n.source_mean == 0.5);
    for (double v : n.xi.v) CHECK(v == 0.0);
}

TEST_CASE("xi is the centered difference, permuted") {
    SlicePair pair = noisy_pair(5);
    double mu = 0.0;
    std::vector<double> want = centered_diff(pair, &mu);
    Prng rng(9);
    DiNoise n = di_noise(pair, rng);
    CHECK(n.source_mean == doctest::Approx(mu).epsilon(1e-15));

    // multiset equality is exact: the shuffle only moves values
    std::vector<double> got = n.xi.v;
    std::sort(want.begin(), want.end());
    std::sort(got.begin(), got.end());
    CHECK(got == want);
}

TEST_CASE("variance is preserved and the mean is zero") {
    SlicePair pair = noisy_pair(6);
    std::vector<double> diff(pair.x.v.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = pair.x.v[i] - pair.x_prime.v[i];
    Prng rng(10);
    DiNoise n = di_noise(pair, rng);

    const double var_diff = population_variance(diff);
    const double var_xi = population_variance(n.xi.v);
    CHECK(std::fabs(var_xi - var_diff) <= 1e-12 * var_diff);

    double max_abs = 0.0;
    for (double v : n.xi.v) max_abs = std::max(max_abs, std::fabs(v));
    CHECK(std::fabs(mean_of(n.xi.v)) <= 1e-12 * max_abs);

    // heavier-than-Gaussian tails are expected from the paired difference of
    // measurements; report the excess kurtosis rather than asserting on it
    double m2 = 0.0, m4 = 0.0;
    for (double v : n.xi.v) {
        m2 += v * v;
        m4 += v * v * v * v;
    }
    m2 /= static_cast<double>(n.xi.v.size());
    m4 /= static_cast<double>(n.xi.v.size());
    MESSAGE("excess kurtosis of xi: " << (m4 / (m2 * m2) - 3.0));
}

TEST_CASE("shuffle depends on the stream and actually permutes") {
    SlicePair pair = noisy_pair(7);
    Prng rng_a(11), rng_a2(11), rng_b(12);
    DiNoise a = di_noise(pair, rng_a);
    DiNoise a2 = di_noise(pair, rng_a2);
    DiNoise b = di_noise(pair, rng_b);
    CHECK(a.xi.v == a2.xi.v);
    CHECK(a.xi.v != b.xi.v);

    std::vector<double> in_order = centered_diff(pair);
    CHECK(a.xi.v != in_order);  // 1024 values: identity permutation is absurd
}

TEST_CASE("reshuffle keeps the multiset and changes the order") {
    SlicePair pair = noisy_pair(8);
    Prng rng(13);
    DiNoise n = di_noise(pair, rng);
    std::vector<double> before = n.xi.v;
    const double mean_before = n.source_mean;

    Prng rng2(14);
    reshuffle(n, rng2);
    CHECK(n.source_mean == mean_before);
    CHECK(n.xi.v != before);
    std::vector<double> a = before, b = n.xi.v;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
}

TEST_CASE("shape mismatch is rejected") {
    SlicePair pair;
    pair.x = Grid(4, 4);
    pair.x_prime = Grid(4, 5);
    Prng rng(1);
    CHECK_THROWS_AS(di_noise(pair, rng), std::invalid_argument);
}
