#include "metarl/meta.hpp"

#include <cmath>
#include <stdexcept>

namespace metarl {

ControllerVariant parse_variant(const std::string& name) {
    if (name == "DE") return ControllerVariant::DE;
    if (name == "PE") return ControllerVariant::PE;
    if (name == "NoEmbed") return ControllerVariant::NoEmbed;
    if (name == "Scratch") return ControllerVariant::Scratch;
    throw std::invalid_argument("unknown controller variant: " + name);
}

std::string variant_name(ControllerVariant v) {
    switch (v) {
        case ControllerVariant::DE: return "DE";
        case ControllerVariant::PE: return "PE";
        case ControllerVariant::NoEmbed: return "NoEmbed";
        case ControllerVariant::Scratch: return "Scratch";
    }
    throw std::logic_error("unknown controller variant");
}

StateVariant state_variant_for(Experiment experiment, ControllerVariant variant) {
    if (uses_embedding(variant)) return StateVariant::MetaBase;
    switch (experiment) {
        case Experiment::BinaryGain: return StateVariant::MetaBase;
        case Experiment::FirstOrderDynamics: return StateVariant::NoEmbedDynamics;
        case Experiment::ControlObjectives: return StateVariant::NoEmbedObjectives;
    }
    throw std::logic_error("unknown experiment");
}

MetaSystem make_system(ControllerVariant variant, StateVariant state_variant,
                       const EnvParams& env, const AgentOptions& agent_opts,
                       const EncoderOptions& enc_opts, Rng& rng) {
    MetaSystem sys;
    sys.variant = variant;
    sys.state_variant = state_variant;
    sys.env = env;

    const int sd = state_dim(state_variant);
    Rng agent_rng = rng.fork(0x61676e74);
    Rng enc_rng = rng.fork(0x656e6372);
    sys.agent = make_agent(sd, kLatentDim, agent_opts, agent_rng);
    const int tuple_dim = 2 * sd + 2;
    const EmbedMode mode = variant == ControllerVariant::PE ? EmbedMode::Probabilistic
                                                            : EmbedMode::Deterministic;
    sys.encoder = make_encoder(tuple_dim, mode, enc_opts, enc_rng);
    return sys;
}

LatentContext compute_latent(const MetaSystem& sys, const Mat& context, Rng& rng,
                             EncoderTape* tape) {
    if (!uses_embedding(sys.variant)) {
        LatentContext latent;
        latent.mode = EmbedMode::Deterministic;
        latent.z = Vec::Zero(kLatentDim);
        return latent;
    }
    return embed(sys.encoder, context, rng, tape);
}

RolloutResult rollout_episode(MetaSystem& sys, const Task& task, const SetpointSchedule& schedule,
                              const Vec& z, bool explore, Rng& noise_rng, Rng& explore_rng,
                              ReplayBuffer* buffer, TrainLog* log, int episode_index) {
    PlantModel plant = discretize(task.plant, sys.env.dt, sys.env.noise_std);
    EpisodeState ep = start_episode(plant, schedule, sys.env.initial_output);

    RolloutResult result;
    const int steps = schedule.total_steps();
    double prev_action = 0.0;
    for (int t = 0; t < steps; ++t) {
        const Vec s = build_state(ep, sys.state_variant);
        const double a = select_action(sys.agent, s, z, explore, explore_rng);
        const double sp = ep.setpoint;
        Transition tr = env_step(task, plant, ep, a, sys.state_variant, sys.env.u_max,
                                 noise_rng);
        result.cum_reward += tr.r;
        result.mean_abs_error += std::abs(sp - ep.outputs[0]);
        if (t > 0) result.mean_abs_action_change += std::abs(tr.a - prev_action);
        prev_action = tr.a;
        if (log) {
            log->trajectory.push_back({task.id, episode_index,
                                       static_cast<double>(t + 1) * sys.env.dt, ep.setpoint,
                                       ep.outputs[0], tr.a, tr.r});
        }
        if (buffer) buffer->insert(std::move(tr));
    }
    result.steps = steps;
    result.mean_abs_error /= steps;
    if (steps > 1) result.mean_abs_action_change /= (steps - 1);
    return result;
}

namespace {

Mat draw_context(const MetaSystem& sys, const ReplayBuffer& buffer, const MetaHyperparams& hp,
                 Rng& rng) {
    const int tuple_dim = 2 * state_dim(sys.state_variant) + 2;
    if (buffer.empty()) return cold_start_context(tuple_dim);
    return sample_context_recent(buffer, hp.context_size, hp.recency_window, rng);
}

struct UpdateRngs {
    Rng context;
    Rng sample;
    Rng latent;
};

// One gradient evaluation for one task; accumulators fill across tasks and a
// single optimizer step per training step applies the summed updates.
void accumulate_task_update(MetaSystem& sys, const ReplayBuffer& buffer,
                            const MetaHyperparams& hp, UpdateRngs& rngs, bool train_encoder) {
    const Mat context = draw_context(sys, buffer, hp, rngs.context);
    EncoderTape tape;
    const bool need_tape = train_encoder && uses_embedding(sys.variant);
    const LatentContext latent =
        compute_latent(sys, context, rngs.latent, need_tape ? &tape : nullptr);

    const auto batch = buffer.sample_uniform(static_cast<std::size_t>(hp.batch_size), rngs.sample);
    const CriticLossResult critic = critic_loss(sys.agent, batch, latent.z);
    actor_loss(sys.agent, batch, latent.z);

    if (need_tape) {
        encoder_backward(sys.encoder, tape, latent, critic.grad_z, hp.pe_regularizer,
                         hp.beta_latent);
    }
}

void apply_updates(MetaSystem& sys, const MetaHyperparams& hp, bool update_encoder) {
    nn::AdamConfig critic_cfg;
    critic_cfg.learning_rate = hp.alpha2;
    nn::AdamConfig actor_cfg;
    actor_cfg.learning_rate = hp.alpha3;
    nn::optimizer_step(sys.agent.critic, critic_cfg);
    nn::optimizer_step(sys.agent.actor, actor_cfg);
    if (update_encoder) {
        nn::AdamConfig enc_cfg;
        enc_cfg.learning_rate = hp.alpha1;
        nn::optimizer_step(sys.encoder.tuple_net, enc_cfg);
        nn::optimizer_step(sys.encoder.head, enc_cfg);
    }
    soft_update_targets(sys.agent, sys.agent.target_blend);
}

}  // namespace

MetaTrainResult meta_train(const std::vector<Task>& tasks, MetaSystem& sys,
                           const MetaHyperparams& hp, Rng& rng) {
    if (tasks.empty()) throw std::invalid_argument("meta_train: empty task set");

    MetaTrainResult result;
    result.buffers.reserve(tasks.size());
    for (std::size_t i = 0; i < tasks.size(); ++i)
        result.buffers.emplace_back(hp.buffer_capacity);

    Rng sched_rng = rng.fork(0x73636864);
    Rng noise_rng = rng.fork(0x6e6f6973);
    Rng explore_rng = rng.fork(0x6578706c);
    UpdateRngs update_rngs{rng.fork(0x63747831), rng.fork(0x62617463), rng.fork(0x7a726e67)};
    Rng rollout_ctx_rng = rng.fork(0x63747832);
    Rng rollout_z_rng = rng.fork(0x7a726f6c);

    for (int episode = 0; episode < hp.episodes; ++episode) {
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            const Mat context = draw_context(sys, result.buffers[i], hp, rollout_ctx_rng);
            const LatentContext latent = compute_latent(sys, context, rollout_z_rng);
            const SetpointSchedule schedule =
                setpoint_schedule(sched_rng, sys.env.setpoints_per_episode, sys.env.setpoint_low,
                                  sys.env.setpoint_high, sys.env.steps_per_setpoint);
            const RolloutResult rr =
                rollout_episode(sys, tasks[i], schedule, latent.z, /*explore=*/true, noise_rng,
                                explore_rng, &result.buffers[i], nullptr, episode);
            result.log.episodes.push_back({episode, tasks[i].id, rr.cum_reward});
        }
        for (int step = 0; step < hp.train_steps_per_episode; ++step) {
            for (std::size_t i = 0; i < tasks.size(); ++i)
                accumulate_task_update(sys, result.buffers[i], hp, update_rngs,
                                       /*train_encoder=*/true);
            apply_updates(sys, hp, uses_embedding(sys.variant));
        }
    }
    return result;
}

AdaptResult adapt(const Task& task, MetaSystem& sys, const MetaHyperparams& hp, Rng& rng,
                  const std::optional<SetpointSchedule>& fixed_schedule,
                  int trajectory_stride) {
    AdaptResult result{TrainLog{}, ReplayBuffer(hp.buffer_capacity)};

    Rng sched_rng = rng.fork(0x73636864);
    Rng noise_rng = rng.fork(0x6e6f6973);
    Rng explore_rng = rng.fork(0x6578706c);
    UpdateRngs update_rngs{rng.fork(0x63747831), rng.fork(0x62617463), rng.fork(0x7a726e67)};
    Rng rollout_ctx_rng = rng.fork(0x63747832);
    Rng rollout_z_rng = rng.fork(0x7a726f6c);

    for (int episode = 0; episode < hp.episodes; ++episode) {
        const Mat context = draw_context(sys, result.buffer, hp, rollout_ctx_rng);
        const LatentContext latent = compute_latent(sys, context, rollout_z_rng);
        const SetpointSchedule schedule =
            fixed_schedule ? *fixed_schedule
                           : setpoint_schedule(sched_rng, sys.env.setpoints_per_episode,
                                               sys.env.setpoint_low, sys.env.setpoint_high,
                                               sys.env.steps_per_setpoint);
        const bool record =
            trajectory_stride > 0 &&
            (episode % trajectory_stride == 0 || episode + 1 == hp.episodes);
        const RolloutResult rr =
            rollout_episode(sys, task, schedule, latent.z, /*explore=*/true, noise_rng,
                            explore_rng, &result.buffer, record ? &result.log : nullptr, episode);
        result.log.episodes.push_back({episode, task.id, rr.cum_reward});

        // Only the actor and critic learn here; the embedding stays frozen.
        for (int step = 0; step < hp.train_steps_per_episode; ++step) {
            accumulate_task_update(sys, result.buffer, hp, update_rngs,
                                   /*train_encoder=*/false);
            apply_updates(sys, hp, /*update_encoder=*/false);
        }
    }
    return result;
}

RolloutResult evaluate_episode(MetaSystem& sys, const Task& task,
                               const SetpointSchedule& schedule, const ReplayBuffer& buffer,
                               const MetaHyperparams& hp, Rng& rng, TrainLog* log,
                               int episode_index) {
    Rng ctx_rng = rng.fork(0x63747833);
    Rng z_rng = rng.fork(0x7a65766c);
    Rng noise_rng = rng.fork(0x6e6f6973);
    Rng unused_explore(0);

    const Mat context = draw_context(sys, buffer, hp, ctx_rng);
    const LatentContext latent = compute_latent(sys, context, z_rng);
    return rollout_episode(sys, task, schedule, latent.z, /*explore=*/false, noise_rng,
                           unused_explore, nullptr, log, episode_index);
}

std::vector<EmbeddingRow> export_embeddings(const MetaSystem& sys,
                                            const std::vector<Task>& tasks,
                                            const std::vector<ReplayBuffer>& buffers,
                                            int n_draws, const MetaHyperparams& hp, Rng& rng) {
    if (tasks.size() != buffers.size())
        throw std::invalid_argument("export_embeddings: tasks/buffers mismatch");

    std::vector<EmbeddingRow> rows;
    rows.reserve(tasks.size() * static_cast<std::size_t>(n_draws));
    Rng ctx_rng = rng.fork(0x63747834);
    Rng z_rng = rng.fork(0x7a657870);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (buffers[i].empty())
            throw std::runtime_error("export_embeddings: empty buffer for task " +
                                     std::to_string(tasks[i].id));
        for (int d = 0; d < n_draws; ++d) {
            const Mat context =
                sample_context_recent(buffers[i], hp.context_size, hp.recency_window, ctx_rng);
            const LatentContext latent = compute_latent(sys, context, z_rng);
            rows.push_back({tasks[i].id, latent.z[0], latent.z[1], latent.z[2]});
        }
    }
    return rows;
}

}  // namespace metarl
