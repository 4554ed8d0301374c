#include "voldiff/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"

namespace voldiff {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const char* section, const std::set<std::string>& allowed) {
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            throw ConfigError(std::string("config: unknown key \"") + item.key() + "\" in section \"" +
                              section + "\"");
}

template <typename T>
void read_field(const json& obj, const char* section, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config: key \"") + key + "\" in section \"" + section +
                          "\" has the wrong type");
    }
}

void apply_schedule(const json& obj, ScheduleConfig& s) {
    require_keys(obj, "schedule", {"T", "warmup_steps", "beta_low", "beta_high"});
    read_field(obj, "schedule", "T", s.T);
    read_field(obj, "schedule", "warmup_steps", s.warmup_steps);
    read_field(obj, "schedule", "beta_low", s.beta_low);
    read_field(obj, "schedule", "beta_high", s.beta_high);
}

void apply_train(const json& obj, TrainConfig& t) {
    require_keys(obj, "train",
                 {"steps", "batch_size", "learning_rate", "adam_beta1", "adam_beta2", "adam_eps",
                  "t_max", "seed", "no_fusion", "gaussian_noise", "full_range_t", "enc_channels",
                  "mid_channels"});
    read_field(obj, "train", "steps", t.steps);
    read_field(obj, "train", "batch_size", t.batch_size);
    read_field(obj, "train", "learning_rate", t.learning_rate);
    read_field(obj, "train", "adam_beta1", t.adam_beta1);
    read_field(obj, "train", "adam_beta2", t.adam_beta2);
    read_field(obj, "train", "adam_eps", t.adam_eps);
    read_field(obj, "train", "t_max", t.t_max);
    read_field(obj, "train", "seed", t.seed);
    read_field(obj, "train", "no_fusion", t.no_fusion);
    read_field(obj, "train", "gaussian_noise", t.gaussian_noise);
    read_field(obj, "train", "full_range_t", t.full_range_t);
    read_field(obj, "train", "enc_channels", t.model.enc_channels);
    read_field(obj, "train", "mid_channels", t.model.mid_channels);
}

void apply_sampler(const json& obj, SamplerConfig& s) {
    require_keys(obj, "sampler",
                 {"t_c", "t_r", "p", "eta", "csnr", "rho1", "rho2", "seed", "no_fusion",
                  "gaussian_noise"});
    read_field(obj, "sampler", "t_c", s.t_c);
    read_field(obj, "sampler", "t_r", s.t_r);
    read_field(obj, "sampler", "p", s.p);
    read_field(obj, "sampler", "eta", s.eta);
    read_field(obj, "sampler", "csnr", s.csnr);
    read_field(obj, "sampler", "rho1", s.rho1);
    read_field(obj, "sampler", "rho2", s.rho2);
    read_field(obj, "sampler", "seed", s.seed);
    bool no_fusion = (s.fusion == FusionMode::no_fusion);
    read_field(obj, "sampler", "no_fusion", no_fusion);
    s.fusion = parse_fusion_mode(no_fusion);
    read_field(obj, "sampler", "gaussian_noise", s.gaussian_noise);
}

}  // namespace

void apply_json_config(RunConfig& cfg, const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
    require_keys(j, "(top level)", {"schedule", "train", "sampler"});
    if (j.contains("schedule")) apply_schedule(j.at("schedule"), cfg.schedule);
    if (j.contains("train")) apply_train(j.at("train"), cfg.train);
    if (j.contains("sampler")) apply_sampler(j.at("sampler"), cfg.sampler);
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    RunConfig cfg;
    apply_json_config(cfg, ss.str());
    return cfg;
}

void validate_config(const RunConfig& cfg) {
    try {
        build_schedule(cfg.schedule);
        run_walk_tau(cfg.sampler.t_c, cfg.sampler.t_r, cfg.sampler.p);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (cfg.train.t_max < 1 || cfg.train.t_max > cfg.schedule.T)
        throw ConfigError("config: train.t_max must be in [1, schedule.T]");
    if (cfg.sampler.t_c > cfg.schedule.T)
        throw ConfigError("config: sampler.t_c must be <= schedule.T");
    if (cfg.train.steps < 0) throw ConfigError("config: train.steps must be >= 0");
    if (cfg.train.batch_size < 1) throw ConfigError("config: train.batch_size must be >= 1");
    if (!(cfg.train.learning_rate > 0.0))
        throw ConfigError("config: train.learning_rate must be > 0");
    if (cfg.train.model.enc_channels < 1 || cfg.train.model.mid_channels < 1)
        throw ConfigError("config: model channel widths must be >= 1");
    if (!(cfg.sampler.csnr >= 0.0)) throw ConfigError("config: sampler.csnr must be >= 0");
    if (!(cfg.sampler.eta >= 0.0 && cfg.sampler.eta <= 1.0))
        throw ConfigError("config: sampler.eta must be in [0, 1]");
}

}  // namespace voldiff
