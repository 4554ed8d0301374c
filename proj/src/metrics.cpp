#include "voldiff/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace voldiff {

namespace {

constexpr int kWin = 11;
constexpr double kWinSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;
constexpr double kPsnrCap = 99.0;

double mse_flat(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        const double sq = d * d - comp;
        const double t = sum + sq;
        comp = (t - sum) - sq;
        sum = t;
    }
    return sum / static_cast<double>(a.size());
}

double psnr_from_mse(double mse, double range) {
    if (mse <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(range * range / mse));
}

std::vector<double> gaussian_window() {
    std::vector<double> g(kWin);
    const int half = kWin / 2;
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i) {
        const double x = i - half;
        g[i] = std::exp(-(x * x) / (2.0 * kWinSigma * kWinSigma));
        sum += g[i];
    }
    for (double& x : g) x /= sum;
    return g;
}

// Separable Gaussian filter, valid region only: output is (h-10) x (w-10).
void filter_valid(const std::vector<double>& in, int h, int w, const std::vector<double>& g,
                  std::vector<double>& out) {
    const int hv = h - kWin + 1, wv = w - kWin + 1;
    std::vector<double> rows(static_cast<std::size_t>(h) * wv, 0.0);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < wv; ++c) {
            double acc = 0.0;
            for (int k = 0; k < kWin; ++k) acc += g[k] * in[static_cast<std::size_t>(r) * w + c + k];
            rows[static_cast<std::size_t>(r) * wv + c] = acc;
        }
    out.assign(static_cast<std::size_t>(hv) * wv, 0.0);
    for (int r = 0; r < hv; ++r)
        for (int c = 0; c < wv; ++c) {
            double acc = 0.0;
            for (int k = 0; k < kWin; ++k) acc += g[k] * rows[static_cast<std::size_t>(r + k) * wv + c];
            out[static_cast<std::size_t>(r) * wv + c] = acc;
        }
}

double masked_mean(const Grid& g, const Mask& m) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (m.m[i]) {
            sum += g.v[i];
            ++n;
        }
    return sum / static_cast<double>(n);
}

double masked_population_variance(const Grid& g, const Mask& m, double mu) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (m.m[i]) {
            const double d = g.v[i] - mu;
            sum += d * d;
            ++n;
        }
    return sum / static_cast<double>(n);
}

}  // namespace

double psnr(const Grid& ref, const Grid& test, double data_range) {
    if (!ref.same_shape(test)) throw std::invalid_argument("psnr: shape mismatch");
    if (ref.v.empty()) throw std::invalid_argument("psnr: empty input");
    if (!(data_range > 0.0)) throw std::invalid_argument("psnr: data_range must be > 0");
    return psnr_from_mse(mse_flat(ref.v, test.v), data_range);
}

double psnr(const Volume4D& ref, const Volume4D& test, double data_range) {
    if (ref.w != test.w || ref.h != test.h || ref.d != test.d || ref.l != test.l)
        throw std::invalid_argument("psnr: volume shape mismatch");
    if (!(data_range > 0.0)) throw std::invalid_argument("psnr: data_range must be > 0");
    double sum = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double d = static_cast<double>(ref.v[i]) - static_cast<double>(test.v[i]);
        const double sq = d * d - comp;
        const double t = sum + sq;
        comp = (t - sum) - sq;
        sum = t;
    }
    return psnr_from_mse(sum / static_cast<double>(ref.size()), data_range);
}

double ssim(const Grid& a, const Grid& b, double data_range) {
    if (!a.same_shape(b)) throw std::invalid_argument("ssim: shape mismatch");
    if (a.h < kWin || a.w < kWin)
        throw std::invalid_argument("ssim: inputs must be at least 11x11");
    if (!(data_range > 0.0)) throw std::invalid_argument("ssim: data_range must be > 0");

    const auto g = gaussian_window();
    const int h = a.h, w = a.w;
    std::vector<double> aa(a.size()), bb(a.size()), ab(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        aa[i] = a.v[i] * a.v[i];
        bb[i] = b.v[i] * b.v[i];
        ab[i] = a.v[i] * b.v[i];
    }
    std::vector<double> mu1, mu2, s11, s22, s12;
    filter_valid(a.v, h, w, g, mu1);
    filter_valid(b.v, h, w, g, mu2);
    filter_valid(aa, h, w, g, s11);
    filter_valid(bb, h, w, g, s22);
    filter_valid(ab, h, w, g, s12);

    const double c1 = (kK1 * data_range) * (kK1 * data_range);
    const double c2 = (kK2 * data_range) * (kK2 * data_range);
    double sum = 0.0;
    for (std::size_t i = 0; i < mu1.size(); ++i) {
        const double m1 = mu1[i], m2 = mu2[i];
        const double var1 = s11[i] - m1 * m1;
        const double var2 = s22[i] - m2 * m2;
        const double cov = s12[i] - m1 * m2;
        sum += ((2.0 * m1 * m2 + c1) * (2.0 * cov + c2)) /
               ((m1 * m1 + m2 * m2 + c1) * (var1 + var2 + c2));
    }
    return sum / static_cast<double>(mu1.size());
}

double ssim(const Volume4D& a, const Volume4D& b, double data_range) {
    if (a.w != b.w || a.h != b.h || a.d != b.d || a.l != b.l)
        throw std::invalid_argument("ssim: volume shape mismatch");
    double sum = 0.0;
    for (int i = 0; i < a.d; ++i)
        for (int j = 0; j < a.l; ++j)
            sum += ssim(get_slice(a, i, j), get_slice(b, i, j), data_range);
    return sum / (static_cast<double>(a.d) * a.l);
}

SnrCnr snr_cnr(const Volume4D& vol, const Mask& signal, const Mask& background) {
    if (signal.h != vol.h || signal.w != vol.w || background.h != vol.h ||
        background.w != vol.w)
        throw std::invalid_argument("snr_cnr: mask shape does not match volume slices");
    if (signal.count() == 0 || background.count() == 0)
        throw std::invalid_argument("snr_cnr: masks must be nonempty");
    for (std::size_t i = 0; i < signal.m.size(); ++i)
        if (signal.m[i] && background.m[i])
            throw std::invalid_argument("snr_cnr: masks must be disjoint");

    SnrCnr out;
    std::vector<double> snrs, cnrs;
    for (int i = 0; i < vol.d; ++i) {
        for (int j = 0; j < vol.l; ++j) {
            const Grid g = get_slice(vol, i, j);
            const double ms = masked_mean(g, signal);
            const double mb = masked_mean(g, background);
            const double vb = masked_population_variance(g, background, mb);
            if (!(vb > 0.0))
                throw std::invalid_argument("snr_cnr: background variance is zero");
            SliceSnr rec;
            rec.slice = i;
            rec.volume = j;
            rec.snr = ms / vb;
            rec.cnr = (ms - mb) / vb;
            snrs.push_back(rec.snr);
            cnrs.push_back(rec.cnr);
            out.per_slice.push_back(rec);
        }
    }
    out.snr_mean = mean_of(snrs);
    out.cnr_mean = mean_of(cnrs);
    out.snr_std = std::sqrt(population_variance(snrs));
    out.cnr_std = std::sqrt(population_variance(cnrs));
    return out;
}

Grid residual(const Grid& a, const Grid& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("residual: shape mismatch");
    Grid out(a.h, a.w);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.v[i] - b.v[i];
        out.v[i] = d * d;
    }
    return out;
}

Volume4D residual(const Volume4D& a, const Volume4D& b) {
    if (a.w != b.w || a.h != b.h || a.d != b.d || a.l != b.l)
        throw std::invalid_argument("residual: volume shape mismatch");
    Volume4D out(a.w, a.h, a.d, a.l);
    out.normalized = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a.v[i]) - static_cast<double>(b.v[i]);
        out.v[i] = static_cast<float>(d * d);
    }
    return out;
}

}  // namespace voldiff
