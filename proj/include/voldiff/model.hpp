#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "voldiff/di_noise.hpp"
#include "voldiff/fusion.hpp"
#include "voldiff/grid.hpp"
#include "voldiff/prng.hpp"
#include "voldiff/schedule.hpp"
#include "voldiff/volume.hpp"

namespace voldiff {

// Small convolutional encoder-decoder with one stride-2 level:
//   conv(2 -> enc) -> conv(enc -> mid, stride 2) -> conv(mid -> mid)
//   -> nearest-neighbor x2 -> conv(mid -> enc) -> skip concat with level 1
//   -> conv(2*enc -> 1, linear)
// All kernels 3x3 pad 1, hidden activations leaky ReLU (slope 0.1).
// The timestep enters as an appended constant input channel 2*alpha_bar_t - 1.
struct ModelConfig {
    int enc_channels = 8;
    int mid_channels = 16;
};

// Flat parameter vector: per layer, kernel [out_c][in_c][3][3] then bias
// [out_c], layers in the order listed above. This is also the checkpoint
// payload order.
struct ModelParams {
    ModelConfig config;
    std::vector<double> w;
};

std::size_t param_count(const ModelConfig& cfg);

// Uniform init in [-k, k], k = 1/sqrt(fan_in), for weights and biases.
ModelParams init_params(const ModelConfig& cfg, Prng& rng);

// Cached activations of one forward pass; the white-box surface used by
// backprop and by the gradient tests. Feature maps are [c][h][w] flattened.
struct NetTape {
    int H = 0, W = 0;
    double cond = 0.0;
    std::vector<double> input;  // 2 channels: x_t and the conditioning plane
    std::vector<double> h1, h2, h3, up, h4, cat;
    Grid y;
};

NetTape net_forward(const ModelParams& params, const Grid& x_t, double alpha_bar_t);

// Reverse pass seeded with dL/dy; parameter gradients are accumulated into
// grad (same layout and length as params.w).
void net_backward(const ModelParams& params, const NetTape& tape, const Grid& dLdy,
                  std::vector<double>& grad);

Grid forward(const ModelParams& params, const Grid& x_t, double alpha_bar_t);

// Mean squared error between x and the prediction from the composed input
// sqrt(abar_t)*fuse(pair, t) + sqrt(1 - abar_t)*xi.
double loss(const ModelParams& params, const SlicePair& pair, int t,
            const NoiseSchedule& sched, const DiNoise& noise,
            FusionMode mode = FusionMode::fused);

struct TrainItem {
    SlicePair pair;
    int t = 1;
    DiNoise noise;
};

// Gradient of the batch-mean loss; returns that loss. Accumulation order is
// fixed (batch order), so results are bit-reproducible.
double gradients(const ModelParams& params, const std::vector<TrainItem>& batch,
                 const NoiseSchedule& sched, std::vector<double>& grad,
                 FusionMode mode = FusionMode::fused);

struct AdamState {
    std::vector<double> m, v;
    long step = 0;
};

void adam_step(ModelParams& params, AdamState& state, const std::vector<double>& grad,
               double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

struct TrainConfig {
    int steps = 100000;      // desk runs use 2000
    int batch_size = 32;     // desk runs use 8
    double learning_rate = 1e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int t_max = 300;          // timesteps are drawn uniformly from {1..t_max}
    std::uint64_t seed = 0;
    bool no_fusion = false;       // substitute x' for the fused x_star
    bool gaussian_noise = false;  // substitute i.i.d. N(0,1) for xi
    bool full_range_t = false;    // draw t from {1..T} instead of {1..t_max}
    ModelConfig model;
};

struct TrainStats {
    std::vector<std::pair<int, double>> loss_log;  // (step, running loss)
    double initial_running_loss = 0.0;             // mean over the first window
    double final_running_loss = 0.0;               // mean over the last window
    int max_t_sampled = 0;
};

// Runs the self-supervised objective: per sample, draw t, build the Di- noise
// from a slice pair, fuse, perturb, predict, regress onto x. Deterministic in
// cfg.seed. Throws on divergence (non-finite loss).
ModelParams train(const Volume4D& data, const TrainConfig& cfg, const NoiseSchedule& sched,
                  TrainStats* stats = nullptr);

// Checkpoint container: one JSON header line
//   {"magic":"VDCP1","enc_channels":E,"mid_channels":M,"param_count":P,
//    "step_count":S,"seed":Q,"dtype":"f32le"}
// followed by the parameters as little-endian f32 in declaration order.
struct Checkpoint {
    ModelParams params;
    long step_count = 0;
    std::uint64_t seed = 0;
};

void save_checkpoint(const ModelParams& params, long step_count, std::uint64_t seed,
                     const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace voldiff
