#pragma once

#include "metarl/config.hpp"
#include "metarl/meta.hpp"

#include <filesystem>
#include <iosfwd>

namespace metarl {

/// The evaluation setpoint schedule is a function of the experiment seed
/// alone, so every controller variant is scored on identical setpoints.
SetpointSchedule fixed_eval_schedule(std::uint64_t seed, const EnvParams& env);

/// Runs the configured experiment and writes the results directory:
/// config.resolved at the root and per-variant episodes.csv, trajectory.csv,
/// metrics.csv, checkpoints, and embeddings.csv where applicable.
void run_experiment(const ExperimentConfig& cfg, std::ostream* progress = nullptr);

/// Recomputes metrics.csv from episodes.csv for every variant directory
/// under `results_dir` (or for `results_dir` itself).
void recompute_metrics(const std::filesystem::path& results_dir);

/// Loads a checkpoint, gathers fresh context on the experiment's task set,
/// and writes embeddings.csv into `results_dir`. The task set and
/// hyperparameters come from the resolved config next to the results.
void export_embeddings_from_checkpoint(const std::filesystem::path& checkpoint_path,
                                       const std::filesystem::path& results_dir);

/// Root seed for one (seed index, variant) training stream.
std::uint64_t run_seed(std::uint64_t seed_base, int seed_index, ControllerVariant variant);

}  // namespace metarl
