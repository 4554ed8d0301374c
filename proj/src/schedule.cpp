#include "voldiff/schedule.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace voldiff {

NoiseSchedule build_schedule(const ScheduleConfig& cfg) {
    if (cfg.T < 1) throw std::invalid_argument("build_schedule: T must be >= 1");
    if (cfg.warmup_steps < 1 || cfg.warmup_steps > cfg.T)
        throw std::invalid_argument("build_schedule: warmup_steps must be in [1, T]");
    if (!(cfg.beta_low > 0.0) || !(cfg.beta_high < 1.0) || cfg.beta_low > cfg.beta_high)
        throw std::invalid_argument("build_schedule: need 0 < beta_low <= beta_high < 1");

    NoiseSchedule s;
    s.config = cfg;
    const int n = cfg.T + 1;
    s.beta.assign(n, 0.0);
    s.alpha.assign(n, 1.0);
    s.alpha_bar.assign(n, 1.0);
    s.one_minus_alpha_bar.assign(n, 0.0);
    s.sigma.assign(n, 0.0);
    s.lambda1.assign(n, 0.0);
    s.lambda2.assign(n, 0.0);

    for (int t = 1; t <= cfg.T; ++t) {
        double beta = cfg.beta_low;
        if (t > cfg.warmup_steps) {
            beta = cfg.beta_low + (cfg.beta_high - cfg.beta_low) *
                                      static_cast<double>(t - cfg.warmup_steps) /
                                      static_cast<double>(cfg.T - cfg.warmup_steps);
        }
        s.beta[t] = beta;
        s.alpha[t] = 1.0 - beta;
        s.alpha_bar[t] = s.alpha_bar[t - 1] * s.alpha[t];
        s.one_minus_alpha_bar[t] = s.one_minus_alpha_bar[t - 1] + s.alpha_bar[t - 1] * beta;
        s.sigma[t] = std::sqrt(beta);
        s.lambda1[t] = std::sqrt(s.alpha_bar[t - 1]) * beta / s.one_minus_alpha_bar[t];
        s.lambda2[t] =
            std::sqrt(s.alpha[t]) * s.one_minus_alpha_bar[t - 1] / s.one_minus_alpha_bar[t];
        if (!(s.alpha_bar[t] > 0.0))
            throw std::invalid_argument("build_schedule: alpha_bar underflowed to zero at t=" +
                                        std::to_string(t));
    }
    return s;
}

std::vector<int> run_walk_tau(int t_c, int t_r, int p) {
    if (t_c < 1) throw std::invalid_argument("run_walk_tau: t_c must be >= 1");
    if (t_r < 1 || t_r > t_c) throw std::invalid_argument("run_walk_tau: need 1 <= t_r <= t_c");
    if (p < 1) throw std::invalid_argument("run_walk_tau: p must be >= 1");

    std::vector<int> tau;
    for (int t = 1; t <= t_r; ++t) tau.push_back(t);
    for (int t = t_r + p; t < t_c; t += p) tau.push_back(t);
    if (tau.back() != t_c) tau.push_back(t_c);
    return tau;
}

}  // namespace voldiff
