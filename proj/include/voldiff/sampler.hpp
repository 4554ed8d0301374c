#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "voldiff/di_noise.hpp"
#include "voldiff/fusion.hpp"
#include "voldiff/grid.hpp"
#include "voldiff/model.hpp"
#include "voldiff/schedule.hpp"
#include "voldiff/volume.hpp"

namespace voldiff {

struct SamplerConfig {
    int t_c = 300;   // chain start (and training-range) timestep
    int t_r = 50;    // dense run length
    int p = 10;      // walk stride
    double eta = 0.0;
    double csnr = 0.040;
    double rho1 = -0.93;  // brain-ratio thresholds
    double rho2 = -0.95;
    std::uint64_t seed = 0;
    FusionMode fusion = FusionMode::fused;
    bool gaussian_noise = false;
};

struct SampleTrace {
    Grid output;
    int steps_executed = 0;  // number of predictor evaluations
    bool terminated_early = false;
    std::vector<std::pair<int, double>> d_history;  // (tau_k, d_x)
};

// b_x = (w*h)/(2*c1) + (w*h)/(2*c2) with c_k = max(1, #{pixels > rho_k}).
double brain_ratio(const Grid& x, double rho1, double rho2);

// d_x = mean((x - x_out)^2) * b_x.
double distance(const Grid& x, const Grid& x_out, double b_x);

// x_{tau-1} = lambda1[tau]*x_out + (1 - lambda1[tau])*x_tau + (sigma[tau]*eta)*xi.
// Written with the (1 - lambda1) coefficient so the speed decomposition
// (x_{tau-1} - x_tau) - lambda1[tau]*(x_out - x_tau) = (sigma[tau]*eta)*xi
// is an exact identity; the table lambda2 differs from (1 - lambda1) by
// less than 1e-7 over the usable range t <= 300.
Grid reverse_step(const Grid& x_tau, const Grid& x_out, int tau, const Grid& xi,
                  double eta, const NoiseSchedule& sched);

// Reverse chain over reversed(run_walk_tau), starting from the forward
// perturbation of the fused pair at t_c. xi is reshuffled on a
// (slice, volume, tau) labeled stream at every step. Terminates early the
// first time d_x exceeds csnr, returning that x_out.
SampleTrace sample(const SlicePair& pair, const ModelParams& params,
                   const SamplerConfig& cfg, const NoiseSchedule& sched);

struct TraceRecord {
    int slice = 0;
    int volume = 0;
    int steps_executed = 0;
    bool terminated_early = false;
    std::vector<std::pair<int, double>> d_history;
};

struct DenoiseResult {
    Volume4D volume;
    std::vector<TraceRecord> traces;  // one per (slice, volume)
};

DenoiseResult denoise_volume(const Volume4D& noisy, const ModelParams& params,
                             const SamplerConfig& cfg, const NoiseSchedule& sched);

}  // namespace voldiff
