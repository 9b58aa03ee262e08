#pragma once

#include "metarl/nn.hpp"
#include "metarl/replay.hpp"
#include "metarl/types.hpp"

#include <vector>

namespace metarl {

/// Actor-critic pair with slow-moving target copies. The actor maps
/// (state, latent) to a bounded action; the critic scores
/// (state, latent, action). Task identity reaches both only through the
/// latent input.
struct AgentNets {
    nn::Network actor;
    nn::Network critic;
    nn::Network actor_target;
    nn::Network critic_target;

    int state_dim = 0;
    int latent_dim = 0;
    double gamma = 0.99;
    double target_blend = 0.005;
    double action_limit = 2.0;
    double explore_std = 0.2;
};

struct AgentOptions {
    int hidden = 64;
    double gamma = 0.99;
    double target_blend = 0.005;
    double action_limit = 2.0;
    double explore_std = 0.2;
    double final_layer_scale = 1e-3;
};

/// Fresh actor/critic with targets hard-copied from the online networks.
AgentNets make_agent(int state_dim, int latent_dim, const AgentOptions& opts, Rng& rng);

/// Deterministic actor output on (s, z), optionally with additive Gaussian
/// exploration noise; always clamped to the action bound.
double select_action(const AgentNets& agent, const Vec& s, const Vec& z, bool explore,
                     Rng& rng);

/// One-step bootstrap target r + gamma * Q_target(s', pi_target(s')), cut at
/// episode boundaries.
double critic_target_value(const AgentNets& agent, double r, const Vec& s_next, const Vec& z,
                           bool done);

struct CriticLossResult {
    double loss = 0.0;
    Vec grad_z;  // summed over the batch; chains into the embedding network
};

/// Mean squared temporal-difference error over the batch. Accumulates
/// gradients into the critic and returns the gradient with respect to the
/// shared latent z. Targets are treated as constants.
CriticLossResult critic_loss(AgentNets& agent, const std::vector<const Transition*>& batch,
                             const Vec& z);

/// Mean critic value of the actor's own actions. Accumulates the gradient of
/// the negated objective into the actor (so a descent step performs ascent);
/// critic accumulators are left untouched.
double actor_loss(AgentNets& agent, const std::vector<const Transition*>& batch, const Vec& z);

/// target <- blend * online + (1 - blend) * target for both target networks.
void soft_update_targets(AgentNets& agent, double blend);

}  // namespace metarl
