#include "voldiff/sampler.hpp"

#include <cmath>
#include <stdexcept>

#include "voldiff/prng.hpp"

namespace voldiff {

namespace {

void validate(const SamplerConfig& cfg, const NoiseSchedule& sched) {
    if (cfg.t_c < 1 || cfg.t_c > sched.config.T)
        throw std::invalid_argument("sampler: t_c must be in [1, T]");
    if (cfg.t_r < 1 || cfg.t_r > cfg.t_c)
        throw std::invalid_argument("sampler: need 1 <= t_r <= t_c");
    if (cfg.p < 1) throw std::invalid_argument("sampler: p must be >= 1");
    if (!(cfg.csnr >= 0.0)) throw std::invalid_argument("sampler: csnr must be >= 0");
    if (!(cfg.eta >= 0.0 && cfg.eta <= 1.0))
        throw std::invalid_argument("sampler: eta must be in [0, 1]");
}

}  // namespace

double brain_ratio(const Grid& x, double rho1, double rho2) {
    if (x.v.empty()) throw std::invalid_argument("brain_ratio: empty grid");
    std::size_t c1 = 0, c2 = 0;
    for (double v : x.v) {
        if (v > rho1) ++c1;
        if (v > rho2) ++c2;
    }
    c1 = std::max<std::size_t>(c1, 1);
    c2 = std::max<std::size_t>(c2, 1);
    const double n = static_cast<double>(x.size());
    return n / (2.0 * static_cast<double>(c1)) + n / (2.0 * static_cast<double>(c2));
}

double distance(const Grid& x, const Grid& x_out, double b_x) {
    if (!x.same_shape(x_out)) throw std::invalid_argument("distance: shape mismatch");
    double sum = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x.v[i] - x_out.v[i];
        const double sq = d * d - comp;
        const double t = sum + sq;
        comp = (t - sum) - sq;
        sum = t;
    }
    return (sum / static_cast<double>(x.size())) * b_x;
}

Grid reverse_step(const Grid& x_tau, const Grid& x_out, int tau, const Grid& xi, double eta,
                  const NoiseSchedule& sched) {
    if (tau < 1 || tau > sched.config.T)
        throw std::invalid_argument("reverse_step: tau outside [1, T]");
    if (!x_tau.same_shape(x_out) || !x_tau.same_shape(xi))
        throw std::invalid_argument("reverse_step: shape mismatch");
    const double l1 = sched.lambda1[tau];
    const double keep = 1.0 - l1;
    const double noise = sched.sigma[tau] * eta;
    Grid out(x_tau.h, x_tau.w);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.v[i] = l1 * x_out.v[i] + keep * x_tau.v[i] + noise * xi.v[i];
    return out;
}

SampleTrace sample(const SlicePair& pair, const ModelParams& params, const SamplerConfig& cfg,
                   const NoiseSchedule& sched) {
    validate(cfg, sched);
    const std::vector<int> tau = run_walk_tau(cfg.t_c, cfg.t_r, cfg.p);
    const auto si = static_cast<std::uint64_t>(pair.slice);
    const auto vi = static_cast<std::uint64_t>(pair.volume);
    Prng root(cfg.seed);

    DiNoise xi;
    if (cfg.gaussian_noise) {
        Prng stream = root.split(0, si, vi);
        xi.xi = Grid(pair.x.h, pair.x.w);
        for (double& v : xi.xi.v) v = stream.next_gaussian();
    } else {
        Prng stream = root.split(0, si, vi);
        xi = di_noise(pair, stream);
    }

    Grid x = perturb(fuse(pair, cfg.t_c, sched, cfg.fusion), xi.xi, cfg.t_c, sched);
    const double b_x = brain_ratio(pair.x, cfg.rho1, cfg.rho2);

    SampleTrace trace;
    for (std::size_t k = tau.size(); k-- > 0;) {
        const int t = tau[k];
        Prng stream = root.split(1, si, vi, static_cast<std::uint64_t>(t));
        if (cfg.gaussian_noise) {
            for (double& v : xi.xi.v) v = stream.next_gaussian();
        } else {
            reshuffle(xi, stream);
        }
        const Grid x_out = forward(params, x, sched.alpha_bar[t]);
        const double d = distance(pair.x, x_out, b_x);
        trace.d_history.emplace_back(t, d);
        trace.steps_executed += 1;
        if (d > cfg.csnr) {
            trace.output = x_out;
            trace.terminated_early = true;
            return trace;
        }
        x = reverse_step(x, x_out, t, xi.xi, cfg.eta, sched);
    }
    trace.output = std::move(x);
    return trace;
}

DenoiseResult denoise_volume(const Volume4D& noisy, const ModelParams& params,
                             const SamplerConfig& cfg, const NoiseSchedule& sched) {
    if (noisy.l < 2) throw std::invalid_argument("denoise_volume: need at least 2 volumes");
    DenoiseResult res;
    res.volume = noisy;
    res.traces.reserve(static_cast<std::size_t>(noisy.d) * noisy.l);
    for (int i = 0; i < noisy.d; ++i) {
        for (int j = 0; j < noisy.l; ++j) {
            const SlicePair pair = slice_pair(noisy, i, j);
            SampleTrace trace = sample(pair, params, cfg, sched);
            set_slice(res.volume, i, j, trace.output);
            TraceRecord rec;
            rec.slice = i;
            rec.volume = j;
            rec.steps_executed = trace.steps_executed;
            rec.terminated_early = trace.terminated_early;
            rec.d_history = std::move(trace.d_history);
            res.traces.push_back(std::move(rec));
        }
    }
    return res;
}

}  // namespace voldiff
