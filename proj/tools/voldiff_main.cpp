// voldiff: simulate | train | denoise | eval for 4D volumes in the DFV
// container. Exit codes: 0 success, 2 bad input/config, 3 runtime failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "voldiff/config.hpp"
#include "voldiff/metrics.hpp"
#include "voldiff/model.hpp"
#include "voldiff/phantom.hpp"
#include "voldiff/sampler.hpp"
#include "voldiff/schedule.hpp"
#include "voldiff/simulate.hpp"
#include "voldiff/volume.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace voldiff;

namespace {

struct SizeSpec {
    int w = 0, h = 0, d = 0, l = 0;
};

SizeSpec parse_size(const std::string& s) {
    SizeSpec sz;
    int consumed = 0;
    if (std::sscanf(s.c_str(), "%dx%dx%dx%d%n", &sz.w, &sz.h, &sz.d, &sz.l, &consumed) != 4 ||
        consumed != static_cast<int>(s.size()))
        throw ConfigError("--size must look like WxHxDxL, got \"" + s + "\"");
    if (sz.w < 1 || sz.h < 1 || sz.d < 1 || sz.l < 1)
        throw ConfigError("--size dimensions must be positive");
    return sz;
}

// Keeps the user's spelling of each value for the output file names.
std::vector<std::pair<std::string, double>> parse_std_list(const std::string& s) {
    std::vector<std::pair<std::string, double>> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        if (comma == std::string::npos) comma = s.size();
        std::string tok = s.substr(pos, comma - pos);
        std::size_t a = tok.find_first_not_of(" \t");
        std::size_t b = tok.find_last_not_of(" \t");
        if (a == std::string::npos) throw ConfigError("--noise-std has an empty entry");
        tok = tok.substr(a, b - a + 1);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw ConfigError("--noise-std entry \"" + tok + "\" is not a number");
        }
        if (used != tok.size()) throw ConfigError("--noise-std entry \"" + tok + "\" is not a number");
        if (!(v >= 0.0)) throw ConfigError("--noise-std values must be >= 0");
        out.emplace_back(tok, v);
        pos = comma + 1;
    }
    if (out.empty()) throw ConfigError("--noise-std needs at least one value");
    return out;
}

void require_file(const std::string& path, const char* what) {
    if (!fs::exists(path)) throw ConfigError(std::string(what) + " not found: " + path);
}

RunConfig base_config(const std::string& config_path) {
    if (config_path.empty()) return RunConfig{};
    require_file(config_path, "config file");
    return load_run_config(config_path);
}

bool config_file_sets(const std::string& config_path, const char* section, const char* key) {
    if (config_path.empty()) return false;
    std::ifstream f(config_path);
    std::stringstream ss;
    ss << f.rdbuf();
    json j = json::parse(ss.str(), nullptr, false);
    return j.is_object() && j.contains(section) && j.at(section).is_object() &&
           j.at(section).contains(key);
}

template <typename T, typename U>
void override_if(const CLI::Option* opt, T& target, const U& value) {
    if (opt != nullptr && opt->count() > 0) target = static_cast<T>(value);
}

Volume4D load_normalized(const std::string& path, const char* what) {
    require_file(path, what);
    Volume4D vol = load_dfv(path);
    if (!vol.normalized) {
        std::cerr << "note: " << path << " is not normalized; rescaling to [-1, 1]\n";
        normalize_volume(vol);
    }
    return vol;
}

void write_text(const std::string& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << body;
    if (!f) throw std::runtime_error("short write to " + path);
}

json trace_to_json(const std::vector<TraceRecord>& traces) {
    json arr = json::array();
    for (const auto& tr : traces) {
        json rec;
        rec["slice"] = tr.slice;
        rec["volume"] = tr.volume;
        rec["steps_executed"] = tr.steps_executed;
        rec["terminated_early"] = tr.terminated_early;
        json hist = json::array();
        for (const auto& [t, d] : tr.d_history) hist.push_back({{"t", t}, {"d", d}});
        rec["d_history"] = std::move(hist);
        arr.push_back(std::move(rec));
    }
    return arr;
}

json snr_to_json(const SnrCnr& s) {
    json out;
    out["snr_mean"] = s.snr_mean;
    out["snr_std"] = s.snr_std;
    out["cnr_mean"] = s.cnr_mean;
    out["cnr_std"] = s.cnr_std;
    json per = json::array();
    for (const auto& p : s.per_slice)
        per.push_back({{"slice", p.slice}, {"volume", p.volume}, {"snr", p.snr}, {"cnr", p.cnr}});
    out["per_slice"] = std::move(per);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"voldiff: self-supervised diffusion denoising for 4D volumes"};
    app.require_subcommand(1);

    // ---- simulate ----
    auto* sim = app.add_subcommand("simulate", "Generate a phantom and noisy copies");
    std::string sim_size = "32x32x4x4";
    std::string sim_stds = "0.2";
    std::string sim_mode = "image";
    std::uint64_t sim_seed = 7;
    std::string sim_out = ".";
    sim->add_option("--size", sim_size, "Dimensions WxHxDxL")->capture_default_str();
    sim->add_option("--noise-std", sim_stds, "Comma-separated noise levels")->capture_default_str();
    sim->add_option("--mode", sim_mode, "Noise domain: image | kspace")->capture_default_str();
    sim->add_option("--seed", sim_seed, "Seed for phantom and noise")->capture_default_str();
    sim->add_option("--out", sim_out, "Output directory")->capture_default_str();
    sim->callback([&]() {
        SizeSpec sz = parse_size(sim_size);
        auto stds = parse_std_list(sim_stds);
        NoiseKind kind = parse_noise_kind(sim_mode);
        Volume4D clean = make_phantom(sz.w, sz.h, sz.d, sz.l, sim_seed);
        fs::create_directories(sim_out);
        fs::path dir(sim_out);
        std::string clean_path = (dir / "clean.dfv").string();
        save_dfv(clean, clean_path);
        std::cout << "wrote " << clean_path << "\n";
        for (std::size_t k = 0; k < stds.size(); ++k) {
            SimulatedPair pair =
                simulate_noise(clean, stds[k].second, kind, sim_seed + 1000003ULL * k);
            std::string noisy_path = (dir / ("noisy_" + stds[k].first + ".dfv")).string();
            save_dfv(pair.noisy, noisy_path);
            std::cout << "wrote " << noisy_path << "\n";
        }
    });

    // ---- train ----
    auto* trn = app.add_subcommand("train", "Train the denoiser on a noisy volume");
    std::string trn_config, trn_input, trn_loss_log;
    std::string trn_out = "model.vdcp";
    int trn_steps = 0, trn_batch = 0, trn_tmax = 0, trn_enc = 0, trn_mid = 0;
    double trn_lr = 0.0;
    std::uint64_t trn_seed = 0;
    bool trn_no_fusion = false, trn_gauss = false, trn_full_t = false;
    trn->add_option("--config", trn_config, "JSON config file");
    trn->add_option("--input", trn_input, "Noisy DFV volume")->required();
    trn->add_option("--out", trn_out, "Checkpoint path")->capture_default_str();
    trn->add_option("--loss-log", trn_loss_log, "CSV loss log path (default <out>.loss.csv)");
    auto* o_steps = trn->add_option("--steps", trn_steps, "Optimizer steps");
    auto* o_batch = trn->add_option("--batch", trn_batch, "Batch size");
    auto* o_lr = trn->add_option("--lr", trn_lr, "Adam learning rate");
    auto* o_tmax = trn->add_option("--t-max", trn_tmax, "Upper end of the sampled t range");
    auto* o_enc = trn->add_option("--enc-channels", trn_enc, "Encoder width");
    auto* o_mid = trn->add_option("--mid-channels", trn_mid, "Bottleneck width");
    auto* o_seed = trn->add_option("--seed", trn_seed, "Training seed");
    auto* o_nf = trn->add_flag("--no-fusion", trn_no_fusion, "Regress from x' instead of the fused slice");
    auto* o_gn = trn->add_flag("--gaussian-noise", trn_gauss, "Use i.i.d. Gaussian noise instead of the shuffled difference");
    auto* o_ft = trn->add_flag("--full-range-t", trn_full_t, "Sample t from the whole schedule");
    trn->callback([&]() {
        RunConfig cfg = base_config(trn_config);
        override_if(o_steps, cfg.train.steps, trn_steps);
        override_if(o_batch, cfg.train.batch_size, trn_batch);
        override_if(o_lr, cfg.train.learning_rate, trn_lr);
        override_if(o_tmax, cfg.train.t_max, trn_tmax);
        override_if(o_enc, cfg.train.model.enc_channels, trn_enc);
        override_if(o_mid, cfg.train.model.mid_channels, trn_mid);
        override_if(o_seed, cfg.train.seed, trn_seed);
        override_if(o_nf, cfg.train.no_fusion, trn_no_fusion);
        override_if(o_gn, cfg.train.gaussian_noise, trn_gauss);
        override_if(o_ft, cfg.train.full_range_t, trn_full_t);
        validate_config(cfg);

        Volume4D data = load_normalized(trn_input, "input volume");
        NoiseSchedule sched = build_schedule(cfg.schedule);
        TrainStats stats;
        ModelParams params = train(data, cfg.train, sched, &stats);

        save_checkpoint(params, cfg.train.steps, cfg.train.seed, trn_out);
        std::string log_path = trn_loss_log.empty() ? trn_out + ".loss.csv" : trn_loss_log;
        std::string csv = "step,running_loss\n";
        for (const auto& [step, rl] : stats.loss_log)
            csv += std::to_string(step) + "," + json(rl).dump() + "\n";
        write_text(log_path, csv);

        std::cout << "wrote " << trn_out << "\n";
        std::cout << "wrote " << log_path << "\n";
        std::cout << "steps=" << cfg.train.steps << " initial_running_loss=" << stats.initial_running_loss
                  << " final_running_loss=" << stats.final_running_loss << "\n";
    });

    // ---- denoise ----
    auto* den = app.add_subcommand("denoise", "Denoise a volume with a trained checkpoint");
    std::string den_config, den_ckpt, den_input, den_trace;
    std::string den_out = "denoised.dfv";
    int den_tc = 0, den_tr = 0, den_p = 0, den_enc = 0, den_mid = 0;
    double den_eta = 0.0, den_csnr = 0.0;
    std::uint64_t den_seed = 0;
    bool den_no_fusion = false, den_gauss = false, den_preview = false;
    den->add_option("--config", den_config, "JSON config file");
    den->add_option("--checkpoint", den_ckpt, "Trained checkpoint")->required();
    den->add_option("--input", den_input, "Noisy DFV volume")->required();
    den->add_option("--out", den_out, "Denoised DFV path")->capture_default_str();
    den->add_option("--trace", den_trace, "Trace JSON path (default <out>.trace.json)");
    auto* d_tc = den->add_option("--tc", den_tc, "Chain start timestep");
    auto* d_tr = den->add_option("--tr", den_tr, "Dense run length");
    auto* d_p = den->add_option("--p", den_p, "Walk stride");
    auto* d_eta = den->add_option("--eta", den_eta, "Stochasticity scale in [0, 1]");
    auto* d_csnr = den->add_option("--csnr", den_csnr, "Early-termination threshold");
    auto* d_seed = den->add_option("--seed", den_seed, "Sampling seed");
    auto* d_nf = den->add_flag("--no-fusion", den_no_fusion, "Start the chain from x' instead of the fused slice");
    auto* d_gn = den->add_flag("--gaussian-noise", den_gauss, "Use i.i.d. Gaussian noise instead of the shuffled difference");
    auto* d_enc = den->add_option("--enc-channels", den_enc, "Expected encoder width");
    auto* d_mid = den->add_option("--mid-channels", den_mid, "Expected bottleneck width");
    den->add_flag("--preview", den_preview, "Write PGM previews of the middle slice");
    den->callback([&]() {
        RunConfig cfg = base_config(den_config);
        override_if(d_tc, cfg.sampler.t_c, den_tc);
        override_if(d_tr, cfg.sampler.t_r, den_tr);
        override_if(d_p, cfg.sampler.p, den_p);
        override_if(d_eta, cfg.sampler.eta, den_eta);
        override_if(d_csnr, cfg.sampler.csnr, den_csnr);
        override_if(d_seed, cfg.sampler.seed, den_seed);
        if (d_nf->count() > 0) cfg.sampler.fusion = parse_fusion_mode(den_no_fusion);
        override_if(d_gn, cfg.sampler.gaussian_noise, den_gauss);
        override_if(d_enc, cfg.train.model.enc_channels, den_enc);
        override_if(d_mid, cfg.train.model.mid_channels, den_mid);
        validate_config(cfg);

        require_file(den_ckpt, "checkpoint");
        Checkpoint ckpt = load_checkpoint(den_ckpt);
        bool arch_requested = d_enc->count() > 0 || d_mid->count() > 0 ||
                              config_file_sets(den_config, "train", "enc_channels") ||
                              config_file_sets(den_config, "train", "mid_channels");
        if (arch_requested && (cfg.train.model.enc_channels != ckpt.params.config.enc_channels ||
                               cfg.train.model.mid_channels != ckpt.params.config.mid_channels))
            throw ConfigError("checkpoint architecture (" +
                              std::to_string(ckpt.params.config.enc_channels) + "/" +
                              std::to_string(ckpt.params.config.mid_channels) +
                              ") does not match the requested " +
                              std::to_string(cfg.train.model.enc_channels) + "/" +
                              std::to_string(cfg.train.model.mid_channels));

        Volume4D noisy = load_normalized(den_input, "input volume");
        NoiseSchedule sched = build_schedule(cfg.schedule);
        DenoiseResult result = denoise_volume(noisy, ckpt.params, cfg.sampler, sched);

        save_dfv(result.volume, den_out);
        std::cout << "wrote " << den_out << "\n";
        std::string trace_path = den_trace.empty() ? den_out + ".trace.json" : den_trace;
        write_text(trace_path, trace_to_json(result.traces).dump(2) + "\n");
        std::cout << "wrote " << trace_path << "\n";

        long total_steps = 0;
        int early = 0;
        for (const auto& tr : result.traces) {
            total_steps += tr.steps_executed;
            early += tr.terminated_early ? 1 : 0;
        }
        std::cout << "slices=" << result.traces.size() << " mean_steps="
                  << (result.traces.empty() ? 0.0
                                            : static_cast<double>(total_steps) /
                                                  static_cast<double>(result.traces.size()))
                  << " early_terminated=" << early << "\n";

        if (den_preview) {
            int mid_slice = noisy.d / 2;
            Grid in = get_slice(noisy, mid_slice, 0);
            Grid out = get_slice(result.volume, mid_slice, 0);
            Grid res = residual(in, out);
            double res_hi = 1e-12;
            for (double v : res.v) res_hi = std::max(res_hi, v);
            fs::path base(den_out);
            fs::path stem = base.parent_path() / base.stem();
            write_pgm(in, stem.string() + "_input.pgm");
            write_pgm(out, stem.string() + "_output.pgm");
            write_pgm(res, stem.string() + "_residual.pgm", 0.0, res_hi);
            std::cout << "wrote " << stem.string() << "_{input,output,residual}.pgm\n";
        }
    });

    // ---- eval ----
    auto* evl = app.add_subcommand("eval", "Report PSNR/SSIM/SNR/CNR for a denoising run");
    std::string evl_clean, evl_noisy, evl_denoised, evl_out;
    evl->add_option("--clean", evl_clean, "Clean reference DFV")->required();
    evl->add_option("--noisy", evl_noisy, "Noisy DFV")->required();
    evl->add_option("--denoised", evl_denoised, "Denoised DFV")->required();
    evl->add_option("--out", evl_out, "Write the JSON report here instead of stdout");
    evl->callback([&]() {
        require_file(evl_clean, "clean volume");
        require_file(evl_noisy, "noisy volume");
        require_file(evl_denoised, "denoised volume");
        Volume4D clean = load_dfv(evl_clean);
        Volume4D noisy = load_dfv(evl_noisy);
        Volume4D den_vol = load_dfv(evl_denoised);
        auto same_dims = [&](const Volume4D& a) {
            return a.w == clean.w && a.h == clean.h && a.d == clean.d && a.l == clean.l;
        };
        if (!same_dims(noisy) || !same_dims(den_vol))
            throw ConfigError("eval inputs must share dimensions");

        json report;
        report["dims"] = {{"w", clean.w}, {"h", clean.h}, {"d", clean.d}, {"l", clean.l}};
        double psnr_noisy = psnr(clean, noisy);
        double psnr_den = psnr(clean, den_vol);
        double ssim_noisy = ssim(clean, noisy);
        double ssim_den = ssim(clean, den_vol);
        report["noisy_vs_clean"] = {{"psnr_db", psnr_noisy}, {"ssim", ssim_noisy}};
        report["denoised_vs_clean"] = {{"psnr_db", psnr_den}, {"ssim", ssim_den}};

        bool have_snr = false;
        SnrCnr snr_noisy, snr_den;
        try {
            PhantomMasks masks = phantom_masks(clean.w, clean.h);
            snr_noisy = snr_cnr(noisy, masks.signal, masks.background);
            snr_den = snr_cnr(den_vol, masks.signal, masks.background);
            have_snr = true;
            report["snr_cnr"] = {{"noisy", snr_to_json(snr_noisy)},
                                 {"denoised", snr_to_json(snr_den)}};
        } catch (const std::invalid_argument&) {
            report["snr_cnr"] = nullptr;  // grid too small for the analytic masks
        }

        std::string table;
        char line[160];
        std::snprintf(line, sizeof line, "%-10s %14s %14s\n", "metric", "noisy", "denoised");
        table += line;
        std::snprintf(line, sizeof line, "%-10s %14.4f %14.4f\n", "psnr_db", psnr_noisy, psnr_den);
        table += line;
        std::snprintf(line, sizeof line, "%-10s %14.6f %14.6f\n", "ssim", ssim_noisy, ssim_den);
        table += line;
        if (have_snr) {
            std::snprintf(line, sizeof line, "%-10s %14.4f %14.4f\n", "snr_mean",
                          snr_noisy.snr_mean, snr_den.snr_mean);
            table += line;
            std::snprintf(line, sizeof line, "%-10s %14.4f %14.4f\n", "cnr_mean",
                          snr_noisy.cnr_mean, snr_den.cnr_mean);
            table += line;
        }

        std::string body = report.dump(2) + "\n";
        if (evl_out.empty()) {
            std::cout << body;
            std::cerr << table;
        } else {
            write_text(evl_out, body);
            std::cout << table;
            std::cout << "wrote " << evl_out << "\n";
        }
    });

    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
