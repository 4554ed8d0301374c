#pragma once

#include "voldiff/grid.hpp"
#include "voldiff/schedule.hpp"
#include "voldiff/volume.hpp"

namespace voldiff {

// fused: x_star = lambda1[t]*x + lambda2[t]*x'.
// no_fusion: ablation that substitutes x' for x_star (coefficients (0, 1)).
enum class FusionMode {
    fused,
    no_fusion,
};

FusionMode parse_fusion_mode(bool no_fusion);

Grid fuse(const SlicePair& pair, int t, const NoiseSchedule& sched,
          FusionMode mode = FusionMode::fused);

// x_t = sqrt(alpha_bar[t]) * x_star + sqrt(1 - alpha_bar[t]) * xi.
Grid perturb(const Grid& x_star, const Grid& xi, int t, const NoiseSchedule& sched);

}  // namespace voldiff
