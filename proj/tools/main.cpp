#include "metarl/config.hpp"
#include "metarl/harness.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Meta-RL setpoint-tracking controller experiments"};
    app.require_subcommand(1);

    // run <preset> [--config FILE] [--seed-count N] [--variant ...] [--out DIR] [--set k=v ...]
    auto* run = app.add_subcommand("run", "Run an experiment preset");
    std::string preset;
    std::string config_file;
    std::vector<std::string> variants;
    std::vector<std::string> sets;
    int seed_count = -1;
    std::string out_dir;
    run->add_option("preset", preset, "Experiment preset")->required();
    run->add_option("--config", config_file, "Config file (key = value lines)");
    run->add_option("--seed-count", seed_count, "Number of seeds");
    run->add_option("--variant", variants, "Controller variant (repeatable): DE|PE|NoEmbed|Scratch");
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--set", sets, "Override any config key, e.g. --set train.episodes=10");

    auto* metrics = app.add_subcommand("metrics", "Recompute metrics.csv from episodes.csv");
    std::string results_dir;
    metrics->add_option("results_dir", results_dir, "Results directory")->required();

    auto* exp = app.add_subcommand("export-embeddings",
                                   "Export latent embeddings from a checkpoint");
    std::string checkpoint_path;
    std::string export_dir;
    exp->add_option("checkpoint", checkpoint_path, "Checkpoint file")->required();
    exp->add_option("results_dir", export_dir, "Results directory with config.resolved")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            metarl::ConfigMap file_map;
            if (!config_file.empty()) file_map = metarl::parse_config_file(config_file);
            if (file_map.count("preset") && preset.empty()) preset = file_map.at("preset");

            metarl::ConfigMap overrides;
            for (const std::string& kv : sets) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos)
                    throw std::invalid_argument("--set expects key=value, got: " + kv);
                overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
            }
            if (seed_count > 0) overrides["seed_count"] = std::to_string(seed_count);
            if (!out_dir.empty()) overrides["out_dir"] = out_dir;
            if (!variants.empty()) {
                std::string joined;
                for (const std::string& v : variants) {
                    if (!joined.empty()) joined += ",";
                    joined += v;
                }
                overrides["variants"] = joined;
            }

            const metarl::ExperimentConfig cfg =
                metarl::resolve_config(preset, file_map, overrides);
            metarl::run_experiment(cfg, &std::cout);
        } else if (*metrics) {
            metarl::recompute_metrics(results_dir);
            std::cout << "metrics recomputed under " << results_dir << "\n";
        } else if (*exp) {
            metarl::export_embeddings_from_checkpoint(checkpoint_path, export_dir);
            std::cout << "embeddings written to " << export_dir << "/embeddings.csv\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
