#include "metarl/harness.hpp"

#include "metarl/checkpoint.hpp"
#include "metarl/metrics.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

namespace metarl {

namespace {

namespace fs = std::filesystem;

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

struct SeedOutcome {
    TrainLog primary;  // training curve, or adaptation curve for adapt presets
    TrainLog eval;     // deterministic post-training rollouts
    std::vector<EmbeddingRow> embeddings;
    MetaSystem system;  // final controller, checkpointed by the writer thread
};

std::string episodes_csv(const std::vector<SeedOutcome>& outcomes) {
    std::string out = "seed,task_id,episode,cum_reward\n";
    for (std::size_t s = 0; s < outcomes.size(); ++s)
        for (const EpisodeRecord& r : outcomes[s].primary.episodes) {
            out += std::to_string(s) + "," + std::to_string(r.task_id) + "," +
                   std::to_string(r.episode) + "," + fmt_double(r.cum_reward) + "\n";
        }
    return out;
}

void append_trajectory(std::string& out, std::size_t seed, const TrainLog& log) {
    for (const TrajectoryPoint& p : log.trajectory) {
        out += std::to_string(seed) + "," + std::to_string(p.task_id) + "," +
               std::to_string(p.episode) + "," + fmt_double(p.t_seconds) + "," +
               fmt_double(p.setpoint) + "," + fmt_double(p.output) + "," +
               fmt_double(p.action) + "," + fmt_double(p.reward) + "\n";
    }
}

std::string trajectory_csv(const std::vector<SeedOutcome>& outcomes) {
    std::string out = "seed,task_id,episode,t_seconds,setpoint,output,action,reward\n";
    for (std::size_t s = 0; s < outcomes.size(); ++s) {
        append_trajectory(out, s, outcomes[s].primary);
        append_trajectory(out, s, outcomes[s].eval);
    }
    return out;
}

std::string embeddings_csv(const std::vector<EmbeddingRow>& rows) {
    std::string out = "task_id,z1,z2,z3\n";
    for (const EmbeddingRow& r : rows) {
        out += std::to_string(r.task_id) + "," + fmt_double(r.z1) + "," + fmt_double(r.z2) +
               "," + fmt_double(r.z3) + "\n";
    }
    return out;
}

/// Per-episode mean cumulative reward across tasks, one series per seed.
std::vector<std::vector<double>> per_seed_series(const std::vector<SeedOutcome>& outcomes) {
    std::vector<std::vector<double>> series;
    for (const SeedOutcome& o : outcomes) {
        std::map<int, std::pair<double, int>> by_episode;  // episode -> (sum, count)
        for (const EpisodeRecord& r : o.primary.episodes) {
            auto& acc = by_episode[r.episode];
            acc.first += r.cum_reward;
            acc.second += 1;
        }
        std::vector<double> s;
        s.reserve(by_episode.size());
        for (const auto& [episode, acc] : by_episode) s.push_back(acc.first / acc.second);
        series.push_back(std::move(s));
    }
    return series;
}

std::string metrics_csv_from_series(const std::vector<std::vector<double>>& series) {
    std::string out = "episode,q1,median,q3,moving_avg_median\n";
    if (series.empty() || series.front().empty()) return out;

    std::vector<double> q1, median, q3;
    if (series.size() == 1) {
        q1 = median = q3 = series.front();
    } else {
        IqrBands bands = iqr_bands(series);
        q1 = std::move(bands.q1);
        median = std::move(bands.median);
        q3 = std::move(bands.q3);
    }
    const std::vector<double> ma = moving_average(median, 20);
    for (std::size_t k = 0; k < median.size(); ++k) {
        out += std::to_string(k) + "," + fmt_double(q1[k]) + "," + fmt_double(median[k]) + "," +
               fmt_double(q3[k]) + "," + fmt_double(ma[k]) + "\n";
    }
    return out;
}

/// Runs one (variant, seed) job and returns everything the writer needs.
SeedOutcome run_seed_job(const ExperimentConfig& cfg, ControllerVariant variant,
                         int seed_index) {
    const std::uint64_t root = run_seed(cfg.seed_base, seed_index, variant);
    Rng rng(root);
    Rng init_rng = rng.fork(0x696e6974);
    Rng train_rng = rng.fork(0x74726169);
    Rng adapt_rng = rng.fork(0x61646170);
    Rng eval_rng = rng.fork(0x6576616c);
    Rng export_rng = rng.fork(0x65787072);

    const std::uint64_t experiment_seed = cfg.seed_base + static_cast<std::uint64_t>(seed_index);
    const std::vector<Task> tasks = cfg.make_tasks();
    const std::vector<Task> train = train_tasks(tasks);

    SeedOutcome outcome;
    outcome.system = make_system(variant, state_variant_for(cfg.experiment, variant), cfg.env,
                                 cfg.agent, cfg.encoder, init_rng);
    MetaSystem& sys = outcome.system;

    const bool is_adapt_preset =
        cfg.preset == "first-order-adapt" || cfg.preset == "objectives-adapt";
    const bool is_export_preset = cfg.preset == "embedding-export";
    const SetpointSchedule eval_schedule = fixed_eval_schedule(experiment_seed, cfg.env);

    if (is_adapt_preset) {
        if (variant != ControllerVariant::Scratch)
            meta_train(train, sys, cfg.train_hp, train_rng);
        AdaptResult ar = adapt(test_task(tasks), sys, cfg.adapt_hp, adapt_rng, eval_schedule,
                               cfg.trajectory_stride);
        outcome.primary = std::move(ar.log);
        return outcome;
    }

    MetaTrainResult mt = meta_train(train, sys, cfg.train_hp, train_rng);
    outcome.primary = std::move(mt.log);

    // Deterministic post-training rollout per train task on the shared
    // evaluation schedule.
    for (std::size_t i = 0; i < train.size(); ++i) {
        evaluate_episode(sys, train[i], eval_schedule, mt.buffers[i], cfg.train_hp, eval_rng,
                         &outcome.eval, cfg.train_hp.episodes);
    }

    if (is_export_preset) {
        // A few zero-update episodes on the held-out task populate its buffer
        // so its embeddings can be exported alongside the training tasks.
        MetaHyperparams ctx_hp = cfg.adapt_hp;
        ctx_hp.episodes = cfg.export_context_episodes;
        ctx_hp.train_steps_per_episode = 0;
        AdaptResult ar = adapt(test_task(tasks), sys, ctx_hp, adapt_rng, eval_schedule, 0);

        std::vector<Task> all = train;
        all.push_back(test_task(tasks));
        std::vector<ReplayBuffer> buffers = std::move(mt.buffers);
        buffers.push_back(std::move(ar.buffer));
        outcome.embeddings =
            export_embeddings(sys, all, buffers, cfg.export_draws, cfg.train_hp, export_rng);
    }
    return outcome;
}

void run_variant(const ExperimentConfig& cfg, ControllerVariant variant,
                 const fs::path& variant_dir, std::ostream* progress) {
    fs::create_directories(variant_dir / "checkpoints");

    std::vector<SeedOutcome> outcomes(static_cast<std::size_t>(cfg.seed_count));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(cfg.seed_count));
    std::atomic<int> next{0};

    const int n_threads = std::max(1, std::min(cfg.threads, cfg.seed_count));
    auto worker = [&] {
        for (;;) {
            const int s = next.fetch_add(1);
            if (s >= cfg.seed_count) return;
            try {
                outcomes[static_cast<std::size_t>(s)] = run_seed_job(cfg, variant, s);
            } catch (...) {
                errors[static_cast<std::size_t>(s)] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);

    write_file(variant_dir / "episodes.csv", episodes_csv(outcomes));
    write_file(variant_dir / "trajectory.csv", trajectory_csv(outcomes));
    write_file(variant_dir / "metrics.csv", metrics_csv_from_series(per_seed_series(outcomes)));

    std::vector<EmbeddingRow> all_embeddings;
    for (std::size_t s = 0; s < outcomes.size(); ++s) {
        const SeedOutcome& o = outcomes[s];
        char name[32];
        std::snprintf(name, sizeof(name), "seed_%03zu.ckpt", s);
        save_checkpoint(variant_dir / "checkpoints" / name, o.system);
        if (!o.embeddings.empty()) {
            const fs::path seed_dir = variant_dir / ("seed_" + std::to_string(s));
            fs::create_directories(seed_dir);
            write_file(seed_dir / "embeddings.csv", embeddings_csv(o.embeddings));
            all_embeddings.insert(all_embeddings.end(), o.embeddings.begin(),
                                  o.embeddings.end());
        }
    }
    if (!all_embeddings.empty())
        write_file(variant_dir / "embeddings.csv", embeddings_csv(all_embeddings));

    if (progress)
        *progress << "  " << variant_name(variant) << ": " << cfg.seed_count << " seed(s) -> "
                  << variant_dir.string() << "\n";
}

}  // namespace

SetpointSchedule fixed_eval_schedule(std::uint64_t seed, const EnvParams& env) {
    Rng rng(splitmix64(seed ^ 0x6576616c5f736368ULL));
    return setpoint_schedule(rng, env.setpoints_per_episode, env.setpoint_low,
                             env.setpoint_high, env.steps_per_setpoint);
}

std::uint64_t run_seed(std::uint64_t seed_base, int seed_index, ControllerVariant variant) {
    const std::uint64_t seed = seed_base + static_cast<std::uint64_t>(seed_index);
    return splitmix64(splitmix64(seed) ^
                      splitmix64(0x76000000ULL + static_cast<std::uint64_t>(variant)));
}

void run_experiment(const ExperimentConfig& cfg, std::ostream* progress) {
    const fs::path out_dir(cfg.out_dir);
    fs::create_directories(out_dir);
    write_file(out_dir / "config.resolved", serialize_config(cfg.resolved));

    if (progress) *progress << "preset " << cfg.preset << " -> " << out_dir.string() << "\n";
    for (ControllerVariant variant : cfg.variants) {
        const auto start = std::chrono::steady_clock::now();
        run_variant(cfg, variant, out_dir / variant_name(variant), progress);
        if (progress) {
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            *progress << "  " << variant_name(variant) << " finished in " << fmt_double(secs)
                      << " s\n";
        }
    }
}

namespace {

void recompute_metrics_one(const fs::path& dir) {
    std::ifstream in(dir / "episodes.csv");
    if (!in) return;
    std::string line;
    if (!std::getline(in, line)) return;

    // seed -> episode -> (sum, count)
    std::map<int, std::map<int, std::pair<double, int>>> data;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        int values_i[3] = {0, 0, 0};
        for (int k = 0; k < 3; ++k) {
            if (!std::getline(ss, field, ',')) throw std::runtime_error("bad episodes.csv row");
            values_i[k] = std::stoi(field);
        }
        if (!std::getline(ss, field, ',')) throw std::runtime_error("bad episodes.csv row");
        auto& acc = data[values_i[0]][values_i[2]];
        acc.first += std::stod(field);
        acc.second += 1;
    }
    if (data.empty()) return;

    std::vector<std::vector<double>> series;
    for (const auto& [seed, eps] : data) {
        std::vector<double> s;
        for (const auto& [episode, acc] : eps) s.push_back(acc.first / acc.second);
        series.push_back(std::move(s));
    }
    write_file(dir / "metrics.csv", metrics_csv_from_series(series));
}

}  // namespace

void recompute_metrics(const fs::path& results_dir) {
    if (fs::exists(results_dir / "episodes.csv")) {
        recompute_metrics_one(results_dir);
        return;
    }
    bool found = false;
    for (const auto& entry : fs::directory_iterator(results_dir)) {
        if (entry.is_directory() && fs::exists(entry.path() / "episodes.csv")) {
            recompute_metrics_one(entry.path());
            found = true;
        }
    }
    if (!found)
        throw std::runtime_error("no episodes.csv under " + results_dir.string());
}

void export_embeddings_from_checkpoint(const fs::path& checkpoint_path,
                                       const fs::path& results_dir) {
    MetaSystem sys = load_checkpoint(checkpoint_path);

    // The task set and sampler settings come from the resolved config stored
    // with the results (falling back to the parent directory for per-variant
    // layouts).
    fs::path config_path = results_dir / "config.resolved";
    if (!fs::exists(config_path)) config_path = results_dir.parent_path() / "config.resolved";
    if (!fs::exists(config_path))
        throw std::runtime_error("export-embeddings: no config.resolved near " +
                                 results_dir.string());
    ConfigMap map = parse_config_file(config_path);
    const auto preset_it = map.find("preset");
    if (preset_it == map.end())
        throw std::runtime_error("export-embeddings: config.resolved lacks a preset");
    const ExperimentConfig cfg = resolve_config(preset_it->second, map);

    const std::vector<Task> tasks = cfg.make_tasks();
    Rng rng(splitmix64(cfg.seed_base ^ 0x657870656d626564ULL));
    Rng ctx_rng = rng.fork(1);
    Rng export_rng = rng.fork(2);

    // Fresh context buffers: a few policy rollouts per task, no updates.
    std::vector<ReplayBuffer> buffers;
    buffers.reserve(tasks.size());
    MetaHyperparams hp = cfg.train_hp;
    for (const Task& task : tasks) {
        ReplayBuffer buffer(hp.buffer_capacity);
        for (int e = 0; e < cfg.export_context_episodes; ++e) {
            Rng sched_rng = ctx_rng.fork(0x73636864);
            Rng noise_rng = ctx_rng.fork(0x6e6f6973);
            Rng explore_rng = ctx_rng.fork(0x6578706c);
            Rng z_rng = ctx_rng.fork(0x7a726e67);
            const SetpointSchedule schedule =
                setpoint_schedule(sched_rng, sys.env.setpoints_per_episode,
                                  sys.env.setpoint_low, sys.env.setpoint_high,
                                  sys.env.steps_per_setpoint);
            const Mat context = buffer.empty()
                                    ? cold_start_context(2 * state_dim(sys.state_variant) + 2)
                                    : sample_context_recent(buffer, hp.context_size,
                                                            hp.recency_window, ctx_rng);
            const LatentContext latent = compute_latent(sys, context, z_rng);
            rollout_episode(sys, task, schedule, latent.z, /*explore=*/true, noise_rng,
                            explore_rng, &buffer, nullptr, e);
        }
        buffers.push_back(std::move(buffer));
    }

    const std::vector<EmbeddingRow> rows =
        export_embeddings(sys, tasks, buffers, cfg.export_draws, hp, export_rng);
    fs::create_directories(results_dir);
    write_file(results_dir / "embeddings.csv", embeddings_csv(rows));
}

}  // namespace metarl
