#pragma once

#include <stdexcept>
#include <string>

#include "voldiff/model.hpp"
#include "voldiff/sampler.hpp"
#include "voldiff/schedule.hpp"

namespace voldiff {

// User-input problems (bad config file, bad flag combinations). The CLI maps
// these (and std::invalid_argument from module preconditions) to exit code 2;
// other runtime failures exit 3.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    ScheduleConfig schedule;
    TrainConfig train;
    SamplerConfig sampler;
};

// Applies a JSON document with optional sections "schedule", "train",
// "sampler" on top of cfg. Unknown sections or keys are rejected.
void apply_json_config(RunConfig& cfg, const std::string& json_text);

RunConfig load_run_config(const std::string& path);

// Cross-field checks shared by the subcommands.
void validate_config(const RunConfig& cfg);

}  // namespace voldiff
