#pragma once

#include <vector>

namespace voldiff {

// Variance schedule with a reverse warm-up: beta stays at beta_low for the
// first warmup_steps timesteps, then rises linearly to beta_high at t = T.
struct ScheduleConfig {
    int T = 1000;
    int warmup_steps = 300;
    double beta_low = 5e-5;
    double beta_high = 1e-2;
};

// All tables are indexed 1..T; index 0 holds the conventional anchors
// alpha_bar[0] = 1 and one_minus_alpha_bar[0] = 0.
//
// one_minus_alpha_bar is tracked by its own recurrence
//   omab_t = omab_{t-1} + alpha_bar_{t-1} * beta_t
// instead of 1 - alpha_bar[t]; this avoids cancellation while alpha_bar is
// close to 1 and makes lambda1[1] == 1 and lambda2[1] == 0 exact.
struct NoiseSchedule {
    ScheduleConfig config;
    std::vector<double> beta;
    std::vector<double> alpha;                 // 1 - beta
    std::vector<double> alpha_bar;             // cumulative product of alpha
    std::vector<double> one_minus_alpha_bar;
    std::vector<double> sigma;                 // sqrt(beta)
    std::vector<double> lambda1;               // sqrt(abar_{t-1}) * beta_t / (1 - abar_t)
    std::vector<double> lambda2;               // sqrt(alpha_t) * (1 - abar_{t-1}) / (1 - abar_t)
};

NoiseSchedule build_schedule(const ScheduleConfig& cfg);

// Run-Walk timestep subset of {1..t_c}:
// the contiguous run {1..t_r}, then the walk {t_r + p, t_r + 2p, ...} while
// strictly below t_c, then t_c itself; sorted and deduplicated.
// t_r == t_c degenerates to the identity sequence 1..t_c.
std::vector<int> run_walk_tau(int t_c, int t_r, int p);

}  // namespace voldiff
