#include "voldiff/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "voldiff/bytes.hpp"

namespace voldiff {

namespace {

constexpr double kLeakySlope = 0.1;
constexpr int kLayers = 5;

struct LayerSpec {
    int ic = 0, oc = 0, stride = 1;
    std::size_t w_off = 0, b_off = 0;
};

struct Layout {
    LayerSpec layer[kLayers];
    std::size_t total = 0;
};

Layout make_layout(const ModelConfig& cfg) {
    if (cfg.enc_channels < 1 || cfg.mid_channels < 1)
        throw std::invalid_argument("ModelConfig: channel widths must be >= 1");
    const int c1 = cfg.enc_channels, c2 = cfg.mid_channels;
    Layout lay;
    const int ic[kLayers] = {2, c1, c2, c2, 2 * c1};
    const int oc[kLayers] = {c1, c2, c2, c1, 1};
    const int st[kLayers] = {1, 2, 1, 1, 1};
    std::size_t off = 0;
    for (int i = 0; i < kLayers; ++i) {
        lay.layer[i] = {ic[i], oc[i], st[i], off,
                        off + static_cast<std::size_t>(oc[i]) * ic[i] * 9};
        off = lay.layer[i].b_off + oc[i];
    }
    lay.total = off;
    return lay;
}

void conv3x3(const double* in, int ic, int ih, int iw, const double* w, const double* b, int oc,
             int stride, double* out, int oh, int ow) {
    for (int o = 0; o < oc; ++o) {
        double* op = out + static_cast<std::size_t>(o) * oh * ow;
        const double bias = b[o];
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) op[y * ow + x] = bias;
        for (int i = 0; i < ic; ++i) {
            const double* ip = in + static_cast<std::size_t>(i) * ih * iw;
            const double* wp = w + (static_cast<std::size_t>(o) * ic + i) * 9;
            for (int y = 0; y < oh; ++y) {
                const int iy0 = y * stride - 1;
                for (int x = 0; x < ow; ++x) {
                    const int ix0 = x * stride - 1;
                    double acc = 0.0;
                    for (int ky = 0; ky < 3; ++ky) {
                        const int iy = iy0 + ky;
                        if (iy < 0 || iy >= ih) continue;
                        const double* row = ip + static_cast<std::size_t>(iy) * iw;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int ix = ix0 + kx;
                            if (ix < 0 || ix >= iw) continue;
                            acc += wp[ky * 3 + kx] * row[ix];
                        }
                    }
                    op[y * ow + x] += acc;
                }
            }
        }
    }
}

// Accumulates dW/db and, when din is non-null, the input gradient.
void conv3x3_backward(const double* in, int ic, int ih, int iw, const double* w, int oc,
                      int stride, const double* dout, int oh, int ow, double* din, double* dw,
                      double* db) {
    for (int o = 0; o < oc; ++o) {
        const double* gp = dout + static_cast<std::size_t>(o) * oh * ow;
        double acc_b = 0.0;
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) acc_b += gp[y * ow + x];
        db[o] += acc_b;
        for (int i = 0; i < ic; ++i) {
            const double* ip = in + static_cast<std::size_t>(i) * ih * iw;
            const double* wp = w + (static_cast<std::size_t>(o) * ic + i) * 9;
            double* dwp = dw + (static_cast<std::size_t>(o) * ic + i) * 9;
            double* dip = din ? din + static_cast<std::size_t>(i) * ih * iw : nullptr;
            for (int y = 0; y < oh; ++y) {
                const int iy0 = y * stride - 1;
                for (int x = 0; x < ow; ++x) {
                    const double g = gp[y * ow + x];
                    const int ix0 = x * stride - 1;
                    for (int ky = 0; ky < 3; ++ky) {
                        const int iy = iy0 + ky;
                        if (iy < 0 || iy >= ih) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int ix = ix0 + kx;
                            if (ix < 0 || ix >= iw) continue;
                            dwp[ky * 3 + kx] += g * ip[iy * iw + ix];
                            if (dip) dip[iy * iw + ix] += g * wp[ky * 3 + kx];
                        }
                    }
                }
            }
        }
    }
}

inline void leaky_relu_inplace(std::vector<double>& v) {
    for (double& x : v)
        if (x < 0.0) x *= kLeakySlope;
}

// Gradient factor recovered from the stored activation; slope is positive so
// the activation sign equals the pre-activation sign.
inline void leaky_relu_backward_inplace(std::vector<double>& grad,
                                        const std::vector<double>& act) {
    for (std::size_t i = 0; i < grad.size(); ++i)
        if (act[i] < 0.0) grad[i] *= kLeakySlope;
}

void upsample2(const std::vector<double>& in, int c, int ih, int iw, std::vector<double>& out) {
    const int oh = ih * 2, ow = iw * 2;
    out.assign(static_cast<std::size_t>(c) * oh * ow, 0.0);
    for (int ch = 0; ch < c; ++ch) {
        const double* ip = in.data() + static_cast<std::size_t>(ch) * ih * iw;
        double* op = out.data() + static_cast<std::size_t>(ch) * oh * ow;
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) op[y * ow + x] = ip[(y >> 1) * iw + (x >> 1)];
    }
}

void upsample2_backward(const std::vector<double>& dout, int c, int ih, int iw,
                        std::vector<double>& din) {
    const int oh = ih * 2, ow = iw * 2;
    din.assign(static_cast<std::size_t>(c) * ih * iw, 0.0);
    for (int ch = 0; ch < c; ++ch) {
        const double* gp = dout.data() + static_cast<std::size_t>(ch) * oh * ow;
        double* dp = din.data() + static_cast<std::size_t>(ch) * ih * iw;
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) dp[(y >> 1) * iw + (x >> 1)] += gp[y * ow + x];
    }
}

void check_input_shape(const Grid& x) {
    if (x.h < 2 || x.w < 2 || (x.h % 2) != 0 || (x.w % 2) != 0)
        throw std::invalid_argument(
            "model: input height and width must be even and >= 2 for the stride-2 level");
}

}  // namespace

std::size_t param_count(const ModelConfig& cfg) { return make_layout(cfg).total; }

ModelParams init_params(const ModelConfig& cfg, Prng& rng) {
    const Layout lay = make_layout(cfg);
    ModelParams p;
    p.config = cfg;
    p.w.assign(lay.total, 0.0);
    for (const auto& L : lay.layer) {
        const double k = 1.0 / std::sqrt(static_cast<double>(L.ic) * 9.0);
        for (std::size_t i = L.w_off; i < L.b_off; ++i) p.w[i] = (2.0 * rng.next_double() - 1.0) * k;
        for (std::size_t i = L.b_off; i < L.b_off + static_cast<std::size_t>(L.oc); ++i)
            p.w[i] = (2.0 * rng.next_double() - 1.0) * k;
    }
    return p;
}

NetTape net_forward(const ModelParams& params, const Grid& x_t, double alpha_bar_t) {
    check_input_shape(x_t);
    const Layout lay = make_layout(params.config);
    if (params.w.size() != lay.total)
        throw std::invalid_argument("net_forward: parameter vector does not match config");
    const int H = x_t.h, W = x_t.w, H2 = H / 2, W2 = W / 2;
    const int c1 = params.config.enc_channels, c2 = params.config.mid_channels;
    const double* pw = params.w.data();

    NetTape tp;
    tp.H = H;
    tp.W = W;
    tp.cond = 2.0 * alpha_bar_t - 1.0;
    tp.input.assign(static_cast<std::size_t>(2) * H * W, tp.cond);
    std::copy(x_t.v.begin(), x_t.v.end(), tp.input.begin());

    const auto& L1 = lay.layer[0];
    tp.h1.assign(static_cast<std::size_t>(c1) * H * W, 0.0);
    conv3x3(tp.input.data(), 2, H, W, pw + L1.w_off, pw + L1.b_off, c1, 1, tp.h1.data(), H, W);
    leaky_relu_inplace(tp.h1);

    const auto& L2 = lay.layer[1];
    tp.h2.assign(static_cast<std::size_t>(c2) * H2 * W2, 0.0);
    conv3x3(tp.h1.data(), c1, H, W, pw + L2.w_off, pw + L2.b_off, c2, 2, tp.h2.data(), H2, W2);
    leaky_relu_inplace(tp.h2);

    const auto& L3 = lay.layer[2];
    tp.h3.assign(static_cast<std::size_t>(c2) * H2 * W2, 0.0);
    conv3x3(tp.h2.data(), c2, H2, W2, pw + L3.w_off, pw + L3.b_off, c2, 1, tp.h3.data(), H2, W2);
    leaky_relu_inplace(tp.h3);

    upsample2(tp.h3, c2, H2, W2, tp.up);

    const auto& L4 = lay.layer[3];
    tp.h4.assign(static_cast<std::size_t>(c1) * H * W, 0.0);
    conv3x3(tp.up.data(), c2, H, W, pw + L4.w_off, pw + L4.b_off, c1, 1, tp.h4.data(), H, W);
    leaky_relu_inplace(tp.h4);

    tp.cat.assign(static_cast<std::size_t>(2) * c1 * H * W, 0.0);
    std::copy(tp.h4.begin(), tp.h4.end(), tp.cat.begin());
    std::copy(tp.h1.begin(), tp.h1.end(), tp.cat.begin() + tp.h4.size());

    const auto& L5 = lay.layer[4];
    tp.y = Grid(H, W);
    conv3x3(tp.cat.data(), 2 * c1, H, W, pw + L5.w_off, pw + L5.b_off, 1, 1, tp.y.v.data(), H, W);
    return tp;
}

void net_backward(const ModelParams& params, const NetTape& tape, const Grid& dLdy,
                  std::vector<double>& grad) {
    const Layout lay = make_layout(params.config);
    if (params.w.size() != lay.total)
        throw std::invalid_argument("net_backward: parameter vector does not match config");
    if (grad.size() != lay.total)
        throw std::invalid_argument("net_backward: gradient vector does not match config");
    if (dLdy.h != tape.H || dLdy.w != tape.W)
        throw std::invalid_argument("net_backward: output gradient shape mismatch");
    const int H = tape.H, W = tape.W, H2 = H / 2, W2 = W / 2;
    const int c1 = params.config.enc_channels, c2 = params.config.mid_channels;
    const double* pw = params.w.data();
    double* gw = grad.data();

    const auto& L5 = lay.layer[4];
    std::vector<double> dcat(tape.cat.size(), 0.0);
    conv3x3_backward(tape.cat.data(), 2 * c1, H, W, pw + L5.w_off, 1, 1, dLdy.v.data(), H, W,
                     dcat.data(), gw + L5.w_off, gw + L5.b_off);

    std::vector<double> dh4(dcat.begin(), dcat.begin() + static_cast<std::size_t>(c1) * H * W);
    std::vector<double> dh1(dcat.begin() + static_cast<std::size_t>(c1) * H * W, dcat.end());

    leaky_relu_backward_inplace(dh4, tape.h4);
    const auto& L4 = lay.layer[3];
    std::vector<double> dup(tape.up.size(), 0.0);
    conv3x3_backward(tape.up.data(), c2, H, W, pw + L4.w_off, c1, 1, dh4.data(), H, W, dup.data(),
                     gw + L4.w_off, gw + L4.b_off);

    std::vector<double> dh3;
    upsample2_backward(dup, c2, H2, W2, dh3);

    leaky_relu_backward_inplace(dh3, tape.h3);
    const auto& L3 = lay.layer[2];
    std::vector<double> dh2(tape.h2.size(), 0.0);
    conv3x3_backward(tape.h2.data(), c2, H2, W2, pw + L3.w_off, c2, 1, dh3.data(), H2, W2,
                     dh2.data(), gw + L3.w_off, gw + L3.b_off);

    leaky_relu_backward_inplace(dh2, tape.h2);
    const auto& L2 = lay.layer[1];
    std::vector<double> dh1_main(tape.h1.size(), 0.0);
    conv3x3_backward(tape.h1.data(), c1, H, W, pw + L2.w_off, c2, 2, dh2.data(), H2, W2,
                     dh1_main.data(), gw + L2.w_off, gw + L2.b_off);

    for (std::size_t i = 0; i < dh1.size(); ++i) dh1[i] += dh1_main[i];
    leaky_relu_backward_inplace(dh1, tape.h1);
    const auto& L1 = lay.layer[0];
    conv3x3_backward(tape.input.data(), 2, H, W, pw + L1.w_off, c1, 1, dh1.data(), H, W, nullptr,
                     gw + L1.w_off, gw + L1.b_off);
}

Grid forward(const ModelParams& params, const Grid& x_t, double alpha_bar_t) {
    return net_forward(params, x_t, alpha_bar_t).y;
}

double loss(const ModelParams& params, const SlicePair& pair, int t, const NoiseSchedule& sched,
            const DiNoise& noise, FusionMode mode) {
    const Grid x_star = fuse(pair, t, sched, mode);
    const Grid x_t = perturb(x_star, noise.xi, t, sched);
    const Grid y = forward(params, x_t, sched.alpha_bar[t]);
    double sum = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = pair.x.v[i] - y.v[i];
        const double sq = d * d - comp;
        const double tsum = sum + sq;
        comp = (tsum - sum) - sq;
        sum = tsum;
    }
    return sum / static_cast<double>(y.size());
}

double gradients(const ModelParams& params, const std::vector<TrainItem>& batch,
                 const NoiseSchedule& sched, std::vector<double>& grad, FusionMode mode) {
    if (batch.empty()) throw std::invalid_argument("gradients: empty batch");
    grad.assign(params.w.size(), 0.0);
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    double total = 0.0;
    for (const auto& item : batch) {
        const Grid x_star = fuse(item.pair, item.t, sched, mode);
        const Grid x_t = perturb(x_star, item.noise.xi, item.t, sched);
        NetTape tape = net_forward(params, x_t, sched.alpha_bar[item.t]);
        const double inv_n = 1.0 / static_cast<double>(tape.y.size());
        Grid dLdy(tape.H, tape.W);
        double item_loss = 0.0;
        for (std::size_t i = 0; i < tape.y.size(); ++i) {
            const double d = tape.y.v[i] - item.pair.x.v[i];
            item_loss += d * d;
            dLdy.v[i] = 2.0 * d * inv_n * inv_b;
        }
        total += item_loss * inv_n;
        net_backward(params, tape, dLdy, grad);
    }
    return total * inv_b;
}

void adam_step(ModelParams& params, AdamState& state, const std::vector<double>& grad, double lr,
               double beta1, double beta2, double eps) {
    if (grad.size() != params.w.size())
        throw std::invalid_argument("adam_step: gradient size mismatch");
    if (state.m.empty()) {
        state.m.assign(params.w.size(), 0.0);
        state.v.assign(params.w.size(), 0.0);
    }
    if (state.m.size() != params.w.size())
        throw std::invalid_argument("adam_step: state size mismatch");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.w.size(); ++i) {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad[i] * grad[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params.w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

ModelParams train(const Volume4D& data, const TrainConfig& cfg, const NoiseSchedule& sched,
                  TrainStats* stats) {
    if (cfg.steps < 0) throw std::invalid_argument("train: steps must be >= 0");
    if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be > 0");
    if (cfg.t_max < 1 || cfg.t_max > sched.config.T)
        throw std::invalid_argument("train: t_max must be in [1, T]");
    if (data.l < 2) throw std::invalid_argument("train: need at least 2 volumes");
    if (data.h < 2 || data.w < 2 || (data.h % 2) || (data.w % 2))
        throw std::invalid_argument("train: slice dimensions must be even and >= 2");

    Prng root(cfg.seed);
    Prng init_stream = root.split(0);
    ModelParams params = init_params(cfg.model, init_stream);
    AdamState adam;
    std::vector<double> grad;
    const FusionMode mode = parse_fusion_mode(cfg.no_fusion);
    const int t_space = cfg.full_range_t ? sched.config.T : cfg.t_max;

    const int window = 100;
    std::vector<double> recent;
    recent.reserve(window);
    int recent_pos = 0;
    double last_finite = 0.0;
    TrainStats local;
    TrainStats& st = stats ? *stats : local;
    st = TrainStats{};
    st.loss_log.reserve(static_cast<std::size_t>(cfg.steps));

    std::vector<TrainItem> batch;
    batch.reserve(static_cast<std::size_t>(cfg.batch_size));
    for (int step = 1; step <= cfg.steps; ++step) {
        batch.clear();
        for (int b = 0; b < cfg.batch_size; ++b) {
            Prng stream = root.split(1, static_cast<std::uint64_t>(step),
                                     static_cast<std::uint64_t>(b));
            TrainItem item;
            item.t = 1 + static_cast<int>(stream.next_below(static_cast<std::uint64_t>(t_space)));
            const int i = static_cast<int>(stream.next_below(static_cast<std::uint64_t>(data.d)));
            const int j = static_cast<int>(stream.next_below(static_cast<std::uint64_t>(data.l)));
            item.pair = slice_pair(data, i, j);
            if (cfg.gaussian_noise) {
                item.noise.xi = Grid(data.h, data.w);
                for (double& x : item.noise.xi.v) x = stream.next_gaussian();
                item.noise.source_mean = 0.0;
            } else {
                item.noise = di_noise(item.pair, stream);
            }
            st.max_t_sampled = std::max(st.max_t_sampled, item.t);
            batch.push_back(std::move(item));
        }

        const double batch_loss = gradients(params, batch, sched, grad, mode);
        if (!std::isfinite(batch_loss))
            throw std::runtime_error("train: diverged at step " + std::to_string(step) +
                                     " (last finite running loss " + std::to_string(last_finite) +
                                     ")");
        adam_step(params, adam, grad, cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2,
                  cfg.adam_eps);

        if (static_cast<int>(recent.size()) < window) {
            recent.push_back(batch_loss);
        } else {
            recent[recent_pos] = batch_loss;
            recent_pos = (recent_pos + 1) % window;
        }
        const double running = kahan_sum(recent) / static_cast<double>(recent.size());
        last_finite = running;
        st.loss_log.emplace_back(step, running);
        if (step == std::min(window, cfg.steps)) st.initial_running_loss = running;
    }
    if (!st.loss_log.empty()) st.final_running_loss = st.loss_log.back().second;
    return params;
}

void save_checkpoint(const ModelParams& params, long step_count, std::uint64_t seed,
                     const std::string& path) {
    const std::size_t expect = param_count(params.config);
    if (params.w.size() != expect)
        throw std::invalid_argument("save_checkpoint: parameter vector does not match config");
    for (double x : params.w)
        if (!std::isfinite(x))
            throw std::runtime_error("save_checkpoint: parameters contain non-finite values");

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path + " for writing");
    std::string header =
        "{\"magic\":\"VDCP1\",\"enc_channels\":" + std::to_string(params.config.enc_channels) +
        ",\"mid_channels\":" + std::to_string(params.config.mid_channels) +
        ",\"param_count\":" + std::to_string(expect) +
        ",\"step_count\":" + std::to_string(step_count) + ",\"seed\":" + std::to_string(seed) +
        ",\"dtype\":\"f32le\"}\n";
    f.write(header.data(), static_cast<std::streamsize>(header.size()));
    std::string payload;
    payload.reserve(params.w.size() * 4);
    for (double x : params.w) append_f32le(payload, static_cast<float>(x));
    f.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!f) throw std::runtime_error("save_checkpoint: write to " + path + " failed");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path);
    std::string header;
    if (!std::getline(f, header))
        throw std::runtime_error("load_checkpoint: " + path + " has no header line");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(header);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("load_checkpoint: header is not valid JSON: ") +
                                 e.what());
    }
    if (j.value("magic", "") != "VDCP1")
        throw std::runtime_error("load_checkpoint: missing magic VDCP1");
    if (j.value("dtype", "") != "f32le")
        throw std::runtime_error("load_checkpoint: unsupported dtype");

    Checkpoint ck;
    ck.params.config.enc_channels = j.value("enc_channels", 0);
    ck.params.config.mid_channels = j.value("mid_channels", 0);
    ck.step_count = j.value("step_count", 0L);
    ck.seed = j.value("seed", static_cast<std::uint64_t>(0));
    const std::size_t expect = param_count(ck.params.config);
    if (j.value("param_count", static_cast<std::size_t>(0)) != expect)
        throw std::runtime_error("load_checkpoint: param_count does not match architecture");

    std::string payload((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (payload.size() != expect * 4)
        throw std::runtime_error("load_checkpoint: payload is " + std::to_string(payload.size()) +
                                 " bytes, expected " + std::to_string(expect * 4));
    ck.params.w.resize(expect);
    const auto* b = reinterpret_cast<const unsigned char*>(payload.data());
    for (std::size_t i = 0; i < expect; ++i) {
        const float x = read_f32le(b + 4 * i);
        if (!std::isfinite(x))
            throw std::runtime_error("load_checkpoint: non-finite parameter at index " +
                                     std::to_string(i));
        ck.params.w[i] = static_cast<double>(x);
    }
    return ck;
}

}  // namespace voldiff
