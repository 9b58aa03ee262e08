#pragma once

#include "metarl/ddpg.hpp"
#include "metarl/embed.hpp"
#include "metarl/env.hpp"

#include <optional>
#include <string>
#include <vector>

namespace metarl {

enum class ControllerVariant { DE, PE, NoEmbed, Scratch };

ControllerVariant parse_variant(const std::string& name);
std::string variant_name(ControllerVariant v);

/// Whether the variant conditions the actor-critic on a learned latent.
inline bool uses_embedding(ControllerVariant v) {
    return v == ControllerVariant::DE || v == ControllerVariant::PE;
}

/// The state the actor-critic sees for a given experiment and variant:
/// embedding controllers keep the base state; the no-embedding baselines get
/// the extended histories they need to identify the task.
StateVariant state_variant_for(Experiment experiment, ControllerVariant variant);

struct MetaHyperparams {
    double alpha1 = 1e-3;       // embedding learning rate
    double alpha2 = 1e-3;       // critic learning rate
    double alpha3 = 1e-3;       // actor learning rate
    double beta_latent = 1e-2;  // latent L1 penalty weight
    int context_size = 64;      // M tuples per context batch
    int recency_window = 200;   // W most recent insertions visible to the context sampler
    int batch_size = 128;       // N transitions per update
    int episodes = 50;
    int train_steps_per_episode = 30;
    std::size_t buffer_capacity = 100000;
    LatentRegularizer pe_regularizer = LatentRegularizer::L1;
};

struct EnvParams {
    double dt = 0.5;
    double noise_std = 0.01;
    double u_max = 2.0;
    int setpoints_per_episode = 10;
    int steps_per_setpoint = 20;
    double setpoint_low = 0.1;
    double setpoint_high = 1.0;
    double initial_output = 0.0;

    int episode_steps() const { return setpoints_per_episode * steps_per_setpoint; }
};

/// A controller: agent networks, the (possibly unused) encoder, and the state
/// convention it was built for.
struct MetaSystem {
    AgentNets agent;
    Encoder encoder;
    ControllerVariant variant = ControllerVariant::DE;
    StateVariant state_variant = StateVariant::MetaBase;
    EnvParams env;
};

MetaSystem make_system(ControllerVariant variant, StateVariant state_variant,
                       const EnvParams& env, const AgentOptions& agent_opts,
                       const EncoderOptions& enc_opts, Rng& rng);

struct EpisodeRecord {
    int episode = 0;
    int task_id = 0;
    double cum_reward = 0.0;
};

struct TrajectoryPoint {
    int task_id = 0;
    int episode = 0;
    double t_seconds = 0.0;
    double setpoint = 0.0;
    double output = 0.0;
    double action = 0.0;
    double reward = 0.0;
};

struct TrainLog {
    std::vector<EpisodeRecord> episodes;
    std::vector<TrajectoryPoint> trajectory;
};

/// Latent for a rollout or update: zero for the no-embedding variants,
/// otherwise computed from context by the encoder.
LatentContext compute_latent(const MetaSystem& sys, const Mat& context, Rng& rng,
                             EncoderTape* tape = nullptr);

struct RolloutResult {
    double cum_reward = 0.0;
    double mean_abs_error = 0.0;
    double mean_abs_action_change = 0.0;
    int steps = 0;
};

/// One episode under a fixed latent. Appends to `buffer` and `log` when given.
RolloutResult rollout_episode(MetaSystem& sys, const Task& task, const SetpointSchedule& schedule,
                              const Vec& z, bool explore, Rng& noise_rng, Rng& explore_rng,
                              ReplayBuffer* buffer, TrainLog* log, int episode_index);

/// Meta-training across tasks: per episode, embed recent context and roll out
/// each task; per training step, update the embedding on the critic loss plus
/// the latent penalty, the critic on its loss, and the actor on its objective.
struct MetaTrainResult {
    TrainLog log;
    std::vector<ReplayBuffer> buffers;  // one per task, aligned with `tasks`
};

MetaTrainResult meta_train(const std::vector<Task>& tasks, MetaSystem& sys,
                           const MetaHyperparams& hp, Rng& rng);

/// Adaptation to a single task with the embedding frozen: per episode, embed
/// context and roll out, then update only critic and actor. When
/// `fixed_schedule` is set every episode replays that schedule.
struct AdaptResult {
    TrainLog log;
    ReplayBuffer buffer;
};

AdaptResult adapt(const Task& task, MetaSystem& sys, const MetaHyperparams& hp, Rng& rng,
                  const std::optional<SetpointSchedule>& fixed_schedule = std::nullopt,
                  int trajectory_stride = 0);

/// Deterministic (noise-free policy) evaluation rollout with the latent
/// inferred from the task's buffer.
RolloutResult evaluate_episode(MetaSystem& sys, const Task& task,
                               const SetpointSchedule& schedule, const ReplayBuffer& buffer,
                               const MetaHyperparams& hp, Rng& rng, TrainLog* log = nullptr,
                               int episode_index = 0);

struct EmbeddingRow {
    int task_id = 0;
    double z1 = 0.0, z2 = 0.0, z3 = 0.0;
};

/// n_draws latent samples per task from fresh context draws on each task's
/// buffer. Throws if a task's buffer is empty.
std::vector<EmbeddingRow> export_embeddings(const MetaSystem& sys,
                                            const std::vector<Task>& tasks,
                                            const std::vector<ReplayBuffer>& buffers,
                                            int n_draws, const MetaHyperparams& hp, Rng& rng);

}  // namespace metarl
