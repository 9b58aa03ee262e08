#include "metarl/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace metarl {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(trim(item));
    return parts;
}

ConfigMap global_defaults() {
    return {
        {"variants", ""},  // empty = the preset's comparison set
        {"seed_count", "10"},
        {"seed_base", "0"},
        {"out_dir", ""},  // empty = <out root>/<preset>
        {"threads", "2"},
        {"train.episodes", "50"},
        {"train.steps_per_episode", "30"},
        {"adapt.episodes", "25"},
        {"adapt.steps_per_episode", "20"},
        {"hp.alpha1", "1e-3"},
        {"hp.alpha2", "1e-3"},
        {"hp.alpha3", "1e-3"},
        {"hp.beta_latent", "1e-2"},
        {"hp.context_size", "64"},
        {"hp.recency_window", "200"},
        {"hp.batch_size", "128"},
        {"hp.buffer_capacity", "100000"},
        {"hp.pe_regularizer", "l1"},
        {"agent.hidden", "64"},
        {"agent.gamma", "0.99"},
        {"agent.target_blend", "0.005"},
        {"agent.explore_std", "0.2"},
        {"agent.final_layer_scale", "1e-3"},
        {"encoder.hidden", "64"},
        {"encoder.feature", "32"},
        {"env.dt", "0.5"},
        {"env.noise_std", "0.01"},
        {"env.u_max", "2"},
        {"env.setpoints_per_episode", "10"},
        {"env.steps_per_setpoint", "20"},
        {"env.setpoint_low", "0.1"},
        {"env.setpoint_high", "1.0"},
        {"env.overshoot_sign_as_printed", "false"},
        {"tasks.gains", "-2,-1,1,2"},
        {"tasks.time_constants", "0.5,1,1.5,2"},
        {"tasks.heldout_gain", "-1"},
        {"tasks.heldout_tau", "2"},
        {"tasks.alpha", "0.1"},
        {"tasks.beta", "0.1"},
        {"tasks.delta", "0.5"},
        {"tasks.test_alpha", "0.1"},
        {"tasks.test_beta", "0.1"},
        {"export.draws", "10"},
        {"export.context_episodes", "3"},
        {"trajectory.stride", "10"},
    };
}

struct PresetInfo {
    Experiment experiment;
    std::string default_variants;
    ConfigMap overrides;
};

const std::map<std::string, PresetInfo>& preset_table() {
    static const std::map<std::string, PresetInfo> table = {
        {"binary-gain",
         {Experiment::BinaryGain, "DE,NoEmbed",
          {{"train.episodes", "100"}, {"train.steps_per_episode", "40"}}}},
        {"first-order-generalize",
         {Experiment::FirstOrderDynamics, "DE,PE,NoEmbed",
          {{"train.episodes", "50"}, {"train.steps_per_episode", "30"}}}},
        {"first-order-adapt",
         {Experiment::FirstOrderDynamics, "DE,Scratch",
          {{"train.episodes", "50"}, {"train.steps_per_episode", "30"}}}},
        {"embedding-export",
         {Experiment::FirstOrderDynamics, "DE",
          {{"train.episodes", "50"}, {"train.steps_per_episode", "30"}}}},
        {"objectives-generalize",
         {Experiment::ControlObjectives, "DE,PE,NoEmbed",
          {{"train.episodes", "60"}, {"train.steps_per_episode", "40"}}}},
        {"objectives-adapt",
         {Experiment::ControlObjectives, "PE,NoEmbed,Scratch",
          {{"train.episodes", "60"}, {"train.steps_per_episode", "40"}}}},
    };
    return table;
}

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad number for " + key + ": '" + value + "'");
    }
}

long long to_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer for " + key + ": '" + value + "'");
    }
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::invalid_argument("config: bad boolean for " + key + ": '" + value + "'");
}

std::vector<double> to_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const std::string& part : split(value, ','))
        if (!part.empty()) out.push_back(to_double(key, part));
    if (out.empty()) throw std::invalid_argument("config: empty list for " + key);
    return out;
}

}  // namespace

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [name, info] : preset_table()) v.push_back(name);
        return v;
    }();
    return names;
}

bool is_known_preset(const std::string& name) { return preset_table().count(name) > 0; }

ConfigMap parse_config_text(const std::string& text) {
    ConfigMap map;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: missing '=' on line " + std::to_string(line_no));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config: empty key on line " + std::to_string(line_no));
        map[key] = value;
    }
    return map;
}

ConfigMap parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

std::string serialize_config(const ConfigMap& map) {
    std::string out;
    for (const auto& [key, value] : map) {
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    }
    return out;
}

std::string default_out_root() {
    if (const char* root = std::getenv("METARL_OUT_ROOT")) return root;
    return "results";
}

std::vector<Task> ExperimentConfig::make_tasks() const {
    std::vector<Task> tasks;
    switch (experiment) {
        case Experiment::BinaryGain:
            tasks = make_task_set(Experiment::BinaryGain);
            break;
        case Experiment::FirstOrderDynamics:
            tasks = make_first_order_tasks(task_gains, task_time_constants, heldout_gain,
                                           heldout_tau);
            break;
        case Experiment::ControlObjectives:
            tasks = make_objective_tasks({1.0, 1.0, 3}, objective_alpha, objective_beta,
                                         objective_delta, objective_test_alpha,
                                         objective_test_beta);
            break;
    }
    if (overshoot_sign_as_printed)
        for (Task& t : tasks) t.reward.overshoot_sign_as_printed = true;
    return tasks;
}

ExperimentConfig resolve_config(const std::string& preset, const ConfigMap& file_map,
                                const ConfigMap& overrides) {
    const auto it = preset_table().find(preset);
    if (it == preset_table().end()) throw std::invalid_argument("unknown preset: " + preset);
    const PresetInfo& info = it->second;

    ConfigMap map = global_defaults();
    map["variants"] = info.default_variants;
    for (const auto& [k, v] : info.overrides) map[k] = v;
    const ConfigMap known = map;  // key universe for validation
    auto apply = [&](const ConfigMap& layer, const char* source) {
        for (const auto& [k, v] : layer) {
            if (k == "preset") {
                if (v != preset)
                    throw std::invalid_argument(std::string("config: preset mismatch in ") +
                                                source + ": '" + v + "' vs '" + preset + "'");
                continue;
            }
            if (known.find(k) == known.end())
                throw std::invalid_argument(std::string("config: unknown key in ") + source +
                                            ": '" + k + "'");
            map[k] = v;
        }
    };
    apply(file_map, "config file");
    apply(overrides, "overrides");

    ExperimentConfig cfg;
    cfg.preset = preset;
    cfg.experiment = info.experiment;
    for (const std::string& name : split(map.at("variants"), ','))
        if (!name.empty()) cfg.variants.push_back(parse_variant(name));
    if (cfg.variants.empty()) throw std::invalid_argument("config: no variants selected");

    cfg.seed_count = static_cast<int>(to_int("seed_count", map.at("seed_count")));
    if (cfg.seed_count < 1) throw std::invalid_argument("config: seed_count must be >= 1");
    cfg.seed_base = static_cast<std::uint64_t>(to_int("seed_base", map.at("seed_base")));
    cfg.out_dir = map.at("out_dir");
    if (cfg.out_dir.empty()) cfg.out_dir = default_out_root() + "/" + preset;
    cfg.threads = static_cast<int>(to_int("threads", map.at("threads")));

    auto fill_hp = [&](MetaHyperparams& hp) {
        hp.alpha1 = to_double("hp.alpha1", map.at("hp.alpha1"));
        hp.alpha2 = to_double("hp.alpha2", map.at("hp.alpha2"));
        hp.alpha3 = to_double("hp.alpha3", map.at("hp.alpha3"));
        hp.beta_latent = to_double("hp.beta_latent", map.at("hp.beta_latent"));
        hp.context_size = static_cast<int>(to_int("hp.context_size", map.at("hp.context_size")));
        hp.recency_window =
            static_cast<int>(to_int("hp.recency_window", map.at("hp.recency_window")));
        hp.batch_size = static_cast<int>(to_int("hp.batch_size", map.at("hp.batch_size")));
        hp.buffer_capacity = static_cast<std::size_t>(
            to_int("hp.buffer_capacity", map.at("hp.buffer_capacity")));
        const std::string reg = map.at("hp.pe_regularizer");
        if (reg == "l1")
            hp.pe_regularizer = LatentRegularizer::L1;
        else if (reg == "kl")
            hp.pe_regularizer = LatentRegularizer::KL;
        else
            throw std::invalid_argument("config: hp.pe_regularizer must be l1 or kl");
    };
    fill_hp(cfg.train_hp);
    cfg.train_hp.episodes = static_cast<int>(to_int("train.episodes", map.at("train.episodes")));
    cfg.train_hp.train_steps_per_episode =
        static_cast<int>(to_int("train.steps_per_episode", map.at("train.steps_per_episode")));
    fill_hp(cfg.adapt_hp);
    cfg.adapt_hp.episodes = static_cast<int>(to_int("adapt.episodes", map.at("adapt.episodes")));
    cfg.adapt_hp.train_steps_per_episode =
        static_cast<int>(to_int("adapt.steps_per_episode", map.at("adapt.steps_per_episode")));

    cfg.env.dt = to_double("env.dt", map.at("env.dt"));
    cfg.env.noise_std = to_double("env.noise_std", map.at("env.noise_std"));
    cfg.env.u_max = to_double("env.u_max", map.at("env.u_max"));
    cfg.env.setpoints_per_episode =
        static_cast<int>(to_int("env.setpoints_per_episode", map.at("env.setpoints_per_episode")));
    cfg.env.steps_per_setpoint =
        static_cast<int>(to_int("env.steps_per_setpoint", map.at("env.steps_per_setpoint")));
    cfg.env.setpoint_low = to_double("env.setpoint_low", map.at("env.setpoint_low"));
    cfg.env.setpoint_high = to_double("env.setpoint_high", map.at("env.setpoint_high"));

    cfg.agent.hidden = static_cast<int>(to_int("agent.hidden", map.at("agent.hidden")));
    cfg.agent.gamma = to_double("agent.gamma", map.at("agent.gamma"));
    cfg.agent.target_blend = to_double("agent.target_blend", map.at("agent.target_blend"));
    cfg.agent.explore_std = to_double("agent.explore_std", map.at("agent.explore_std"));
    cfg.agent.final_layer_scale =
        to_double("agent.final_layer_scale", map.at("agent.final_layer_scale"));
    cfg.agent.action_limit = cfg.env.u_max;

    cfg.encoder.hidden = static_cast<int>(to_int("encoder.hidden", map.at("encoder.hidden")));
    cfg.encoder.feature = static_cast<int>(to_int("encoder.feature", map.at("encoder.feature")));

    cfg.task_gains = to_double_list("tasks.gains", map.at("tasks.gains"));
    cfg.task_time_constants =
        to_double_list("tasks.time_constants", map.at("tasks.time_constants"));
    cfg.heldout_gain = to_double("tasks.heldout_gain", map.at("tasks.heldout_gain"));
    cfg.heldout_tau = to_double("tasks.heldout_tau", map.at("tasks.heldout_tau"));
    cfg.objective_alpha = to_double("tasks.alpha", map.at("tasks.alpha"));
    cfg.objective_beta = to_double("tasks.beta", map.at("tasks.beta"));
    cfg.objective_delta = to_double("tasks.delta", map.at("tasks.delta"));
    cfg.objective_test_alpha = to_double("tasks.test_alpha", map.at("tasks.test_alpha"));
    cfg.objective_test_beta = to_double("tasks.test_beta", map.at("tasks.test_beta"));
    cfg.overshoot_sign_as_printed =
        to_bool("env.overshoot_sign_as_printed", map.at("env.overshoot_sign_as_printed"));

    cfg.export_draws = static_cast<int>(to_int("export.draws", map.at("export.draws")));
    cfg.export_context_episodes =
        static_cast<int>(to_int("export.context_episodes", map.at("export.context_episodes")));
    cfg.trajectory_stride =
        static_cast<int>(to_int("trajectory.stride", map.at("trajectory.stride")));

    map["preset"] = preset;
    map["out_dir"] = cfg.out_dir;
    cfg.resolved = std::move(map);
    return cfg;
}

}  // namespace metarl
