#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "voldiff/metrics.hpp"
#include "voldiff/prng.hpp"

using namespace voldiff;

namespace {

Grid random_grid(int h, int w, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    Prng rng(seed);
    Grid g(h, w);
    for (double& v : g.v) v = lo + (hi - lo) * rng.next_double();
    return g;
}

// direct (non-separable) windowed SSIM with outer-product Gaussian weights
double ssim_direct(const Grid& a, const Grid& b, double range) {
    const int win = 11;
    std::vector<double> g(win);
    double gs = 0.0;
    for (int i = 0; i < win; ++i) {
        const double x = i - win / 2;
        g[i] = std::exp(-(x * x) / (2.0 * 1.5 * 1.5));
        gs += g[i];
    }
    for (double& x : g) x /= gs;

    const double c1 = (0.01 * range) * (0.01 * range);
    const double c2 = (0.03 * range) * (0.03 * range);
    double sum = 0.0;
    int n = 0;
    for (int r = 0; r + win <= a.h; ++r)
        for (int c = 0; c + win <= a.w; ++c, ++n) {
            double m1 = 0, m2 = 0, s11 = 0, s22 = 0, s12 = 0;
            for (int i = 0; i < win; ++i)
                for (int j = 0; j < win; ++j) {
                    const double wgt = g[i] * g[j];
                    const double va = a.v[static_cast<std::size_t>(r + i) * a.w + c + j];
                    const double vb = b.v[static_cast<std::size_t>(r + i) * b.w + c + j];
                    m1 += wgt * va;
                    m2 += wgt * vb;
                    s11 += wgt * va * va;
                    s22 += wgt * vb * vb;
                    s12 += wgt * va * vb;
                }
            const double var1 = s11 - m1 * m1;
            const double var2 = s22 - m2 * m2;
            const double cov = s12 - m1 * m2;
            sum += ((2.0 * m1 * m2 + c1) * (2.0 * cov + c2)) /
                   ((m1 * m1 + m2 * m2 + c1) * (var1 + var2 + c2));
        }
    return sum / n;
}

}  // namespace

TEST_CASE("psnr hand values") {
    Grid a = random_grid(4, 4, 1);
    CHECK(psnr(a, a) == 99.0);

    // constant offset 0.25: MSE = 0.0625 exactly, range 2
    Grid b = a;
    for (double& v : b.v) v += 0.25;
    CHECK(psnr(a, b) == 10.0 * std::log10(4.0 / 0.0625));
    CHECK(psnr(a, b) == doctest::Approx(18.061799739838872).epsilon(1e-12));
    CHECK(psnr(a, b, 2.0) == psnr(a, b));

    // shrinking the range lowers the score by 20*log10(2)
    CHECK(psnr(a, b, 1.0) ==
          doctest::Approx(psnr(a, b, 2.0) - 20.0 * std::log10(2.0)).epsilon(1e-12));

    // near-identical inputs hit the cap
    Grid c = a;
    for (double& v : c.v) v += 1e-9;
    CHECK(psnr(a, c) == 99.0);

    Grid wrong(4, 5);
    CHECK_THROWS_AS(psnr(a, wrong), std::invalid_argument);
    CHECK_THROWS_AS(psnr(a, b, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(psnr(a, b, -1.0), std::invalid_argument);
}

TEST_CASE("psnr volume overload matches the slice computation") {
    Grid a = random_grid(6, 5, 2);
    Grid b = random_grid(6, 5, 3);
    Volume4D va(5, 6, 1, 1), vb(5, 6, 1, 1);
    set_slice(va, 0, 0, a);
    set_slice(vb, 0, 0, b);
    // compare against the f32-quantized grids the volume actually stores
    CHECK(psnr(va, vb) == psnr(get_slice(va, 0, 0), get_slice(vb, 0, 0)));

    Volume4D vc(5, 6, 2, 1);
    CHECK_THROWS_AS(psnr(va, vc), std::invalid_argument);
}

TEST_CASE("ssim of identical images is exactly one") {
    Grid a = random_grid(16, 16, 4);
    CHECK(ssim(a, a) == 1.0);
}

TEST_CASE("ssim matches a direct windowed oracle") {
    Grid a = random_grid(16, 20, 5);
    Grid b = a;
    {
        Prng rng(6);
        for (double& v : b.v) v += 0.1 * rng.next_gaussian();
    }
    const double got = ssim(a, b);
    const double want = ssim_direct(a, b, 2.0);
    CHECK(got == doctest::Approx(want).epsilon(1e-10));
    CHECK(got < 1.0);
    CHECK(got > 0.0);

    // also at a different data range
    CHECK(ssim(a, b, 1.0) == doctest::Approx(ssim_direct(a, b, 1.0)).epsilon(1e-10));

    // blurrier corruption scores lower than mild corruption
    Grid c = a;
    {
        Prng rng(7);
        for (double& v : c.v) v += 0.6 * rng.next_gaussian();
    }
    CHECK(ssim(a, c) < got);
}

TEST_CASE("anticorrelated structure drives ssim negative") {
    Grid a(16, 16);
    for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 16; ++c) a.at(r, c) = ((r + c) % 2 == 0) ? 0.5 : -0.5;
    Grid b = a;
    for (double& v : b.v) v = -v;
    CHECK(ssim(a, b) < 0.0);
    CHECK(ssim(a, b) == doctest::Approx(ssim_direct(a, b, 2.0)).epsilon(1e-10));
}

TEST_CASE("ssim validation") {
    Grid small(10, 16), ok(11, 11), mismatch(11, 12);
    CHECK_THROWS_AS(ssim(small, small), std::invalid_argument);
    CHECK_THROWS_AS(ssim(ok, mismatch), std::invalid_argument);
    CHECK_THROWS_AS(ssim(ok, ok, 0.0), std::invalid_argument);
    CHECK_NOTHROW(ssim(ok, ok));  // exactly one window
}

TEST_CASE("ssim volume overload averages the per-slice scores") {
    Volume4D va(12, 12, 2, 1), vb(12, 12, 2, 1);
    set_slice(va, 0, 0, random_grid(12, 12, 8));
    set_slice(va, 1, 0, random_grid(12, 12, 9));
    set_slice(vb, 0, 0, random_grid(12, 12, 10));
    set_slice(vb, 1, 0, random_grid(12, 12, 11));
    const double s0 = ssim(get_slice(va, 0, 0), get_slice(vb, 0, 0));
    const double s1 = ssim(get_slice(va, 1, 0), get_slice(vb, 1, 0));
    CHECK(ssim(va, vb) == doctest::Approx((s0 + s1) / 2.0).epsilon(1e-15));
}

TEST_CASE("snr_cnr hand example with exact values") {
    // all intensities are exact in f32, so every statistic is exact
    Volume4D vol(4, 4, 1, 2);
    Grid g0(4, 4), g1(4, 4);
    g0.v[0] = 0.75;
    g0.v[1] = 0.5;   // signal mean 0.625
    g0.v[2] = 0.125;
    g0.v[3] = 0.375;  // background mean 0.25, population variance 0.015625
    g1.v[0] = 1.0;
    g1.v[1] = 0.5;   // signal mean 0.75
    g1.v[2] = 0.25;
    g1.v[3] = -0.25;  // background mean 0, population variance 0.0625
    set_slice(vol, 0, 0, g0);
    set_slice(vol, 0, 1, g1);

    Mask signal(4, 4), background(4, 4);
    signal.m[0] = signal.m[1] = 1;
    background.m[2] = background.m[3] = 1;

    SnrCnr r = snr_cnr(vol, signal, background);
    REQUIRE(r.per_slice.size() == 2);
    CHECK(r.per_slice[0].snr == 40.0);  // 0.625 / 0.015625
    CHECK(r.per_slice[0].cnr == 24.0);  // 0.375 / 0.015625
    CHECK(r.per_slice[1].snr == 12.0);  // 0.75 / 0.0625
    CHECK(r.per_slice[1].cnr == 12.0);
    CHECK(r.per_slice[0].slice == 0);
    CHECK(r.per_slice[0].volume == 0);
    CHECK(r.per_slice[1].volume == 1);
    CHECK(r.snr_mean == 26.0);
    CHECK(r.snr_std == 14.0);
    CHECK(r.cnr_mean == 18.0);
    CHECK(r.cnr_std == 6.0);
}

TEST_CASE("snr_cnr validation") {
    Volume4D vol(4, 4, 1, 1);
    for (float& v : vol.v) v = 0.5f;  // constant background: zero variance
    Mask signal(4, 4), background(4, 4), empty(4, 4), overlap(4, 4), wrong(4, 5);
    signal.m[0] = 1;
    background.m[2] = 1;
    overlap.m[0] = 1;

    CHECK_THROWS_AS(snr_cnr(vol, signal, background), std::invalid_argument);
    CHECK_THROWS_AS(snr_cnr(vol, signal, empty), std::invalid_argument);
    CHECK_THROWS_AS(snr_cnr(vol, empty, background), std::invalid_argument);
    CHECK_THROWS_AS(snr_cnr(vol, signal, overlap), std::invalid_argument);
    wrong.m[0] = 1;
    CHECK_THROWS_AS(snr_cnr(vol, wrong, background), std::invalid_argument);
}

TEST_CASE("residual is the elementwise squared difference") {
    Grid a(2, 2), b(2, 2);
    a.v = {1.0, -0.5, 0.25, 2.0};
    b.v = {0.5, 0.5, 0.25, -1.0};
    Grid r = residual(a, b);
    CHECK(r.v == std::vector<double>{0.25, 1.0, 0.0, 9.0});
    Grid wrong(2, 3);
    CHECK_THROWS_AS(residual(a, wrong), std::invalid_argument);

    Volume4D va(2, 2, 1, 1), vb(2, 2, 1, 1);
    set_slice(va, 0, 0, a);
    set_slice(vb, 0, 0, b);
    Volume4D vr = residual(va, vb);
    CHECK(!vr.normalized);
    CHECK(get_slice(vr, 0, 0).v == std::vector<double>{0.25, 1.0, 0.0, 9.0});
    Volume4D vw(2, 2, 1, 2);
    CHECK_THROWS_AS(residual(va, vw), std::invalid_argument);
}
