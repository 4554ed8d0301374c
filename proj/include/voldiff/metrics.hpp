#pragma once

#include <vector>

#include "voldiff/grid.hpp"
#include "voldiff/volume.hpp"

namespace voldiff {

// 10*log10(range^2 / MSE), capped at 99 dB (also the value for MSE == 0).
double psnr(const Grid& ref, const Grid& test, double data_range = 2.0);
double psnr(const Volume4D& ref, const Volume4D& test, double data_range = 2.0);

// Mean local SSIM over all fully-covered 11x11 windows, Gaussian weights
// sigma = 1.5, K1 = 0.01, K2 = 0.03. Inputs must be at least 11x11.
double ssim(const Grid& a, const Grid& b, double data_range = 2.0);
// Mean of per-slice SSIM over every (slice, volume).
double ssim(const Volume4D& a, const Volume4D& b, double data_range = 2.0);

// SNR = Mean(signal) / Var(background), CNR = (Mean(signal) - Mean(background))
// / Var(background), evaluated per 2D slice and aggregated as mean and std
// over all (slice, volume) entries. Variance is the population variance,
// applied verbatim (not the standard deviation).
struct SliceSnr {
    int slice = 0;
    int volume = 0;
    double snr = 0.0;
    double cnr = 0.0;
};

struct SnrCnr {
    double snr_mean = 0.0, snr_std = 0.0;
    double cnr_mean = 0.0, cnr_std = 0.0;
    std::vector<SliceSnr> per_slice;
};

SnrCnr snr_cnr(const Volume4D& vol, const Mask& signal, const Mask& background);

// Elementwise squared difference.
Grid residual(const Grid& a, const Grid& b);
Volume4D residual(const Volume4D& a, const Volume4D& b);

}  // namespace voldiff
