#pragma once

#include "metarl/meta.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace metarl {

/// Flat key=value configuration. Resolution order: built-in defaults, then
/// the preset's overrides, then the config file, then command-line overrides.
/// Unknown keys are rejected.
using ConfigMap = std::map<std::string, std::string>;

const std::vector<std::string>& preset_names();
bool is_known_preset(const std::string& name);

/// Parses `key = value` lines; '#' starts a comment, blank lines are ignored.
ConfigMap parse_config_text(const std::string& text);
ConfigMap parse_config_file(const std::filesystem::path& path);
std::string serialize_config(const ConfigMap& map);

/// Fully resolved experiment description; every field has a value.
struct ExperimentConfig {
    std::string preset;
    Experiment experiment = Experiment::BinaryGain;
    std::vector<ControllerVariant> variants;
    int seed_count = 10;
    std::uint64_t seed_base = 0;
    std::string out_dir;
    int threads = 2;

    MetaHyperparams train_hp;  // episodes/steps filled from train.*
    MetaHyperparams adapt_hp;  // episodes/steps filled from adapt.*
    EnvParams env;
    AgentOptions agent;
    EncoderOptions encoder;

    // Task-set knobs.
    std::vector<double> task_gains;
    std::vector<double> task_time_constants;
    double heldout_gain = -1.0;
    double heldout_tau = 2.0;
    double objective_alpha = 0.1;
    double objective_beta = 0.1;
    double objective_delta = 0.5;
    double objective_test_alpha = 0.1;
    double objective_test_beta = 0.1;
    bool overshoot_sign_as_printed = false;

    int export_draws = 10;
    int export_context_episodes = 3;
    int trajectory_stride = 10;

    ConfigMap resolved;  // the full map the struct was built from

    std::vector<Task> make_tasks() const;
};

/// Applies preset inheritance and builds the typed config.
/// `overrides` wins over `file_map`, which wins over the preset defaults.
ExperimentConfig resolve_config(const std::string& preset, const ConfigMap& file_map = {},
                                const ConfigMap& overrides = {});

/// Default output root: $METARL_OUT_ROOT if set, otherwise "results".
std::string default_out_root();

}  // namespace metarl
