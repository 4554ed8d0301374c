#include "voldiff/fusion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace voldiff {

namespace {

void check_t(int t, const NoiseSchedule& sched, const char* who) {
    if (t < 1 || t > sched.config.T)
        throw std::invalid_argument(std::string(who) + ": t=" + std::to_string(t) +
                                    " outside [1, " + std::to_string(sched.config.T) + "]");
}

}  // namespace

FusionMode parse_fusion_mode(bool no_fusion) {
    return no_fusion ? FusionMode::no_fusion : FusionMode::fused;
}

Grid fuse(const SlicePair& pair, int t, const NoiseSchedule& sched, FusionMode mode) {
    check_t(t, sched, "fuse");
    if (!pair.x.same_shape(pair.x_prime))
        throw std::invalid_argument("fuse: pair slices have different shapes");
    if (mode == FusionMode::no_fusion) return pair.x_prime;

    const double l1 = sched.lambda1[t];
    const double l2 = sched.lambda2[t];
    Grid out(pair.x.h, pair.x.w);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.v[i] = l1 * pair.x.v[i] + l2 * pair.x_prime.v[i];
    return out;
}

Grid perturb(const Grid& x_star, const Grid& xi, int t, const NoiseSchedule& sched) {
    check_t(t, sched, "perturb");
    if (!x_star.same_shape(xi))
        throw std::invalid_argument("perturb: x_star and xi have different shapes");
    const double a = std::sqrt(sched.alpha_bar[t]);
    const double b = std::sqrt(sched.one_minus_alpha_bar[t]);
    Grid out(x_star.h, x_star.w);
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] = a * x_star.v[i] + b * xi.v[i];
    return out;
}

}  // namespace voldiff
