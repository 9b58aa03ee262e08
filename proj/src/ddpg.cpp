#include "metarl/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace metarl {

namespace {

using nn::Activation;

void check_latent(const AgentNets& agent, const Vec& z) {
    if (z.size() != agent.latent_dim)
        throw std::invalid_argument("latent dimension mismatch");
}

Mat assemble_actor_input(const AgentNets& agent, const std::vector<const Transition*>& batch,
                         const Vec& z, bool next_state) {
    const int n = static_cast<int>(batch.size());
    Mat x(agent.state_dim + agent.latent_dim, n);
    for (int i = 0; i < n; ++i) {
        const Vec& s = next_state ? batch[i]->s_next : batch[i]->s;
        if (s.size() != agent.state_dim)
            throw std::invalid_argument("state dimension mismatch");
        x.col(i).head(agent.state_dim) = s;
        x.col(i).tail(agent.latent_dim) = z;
    }
    return x;
}

}  // namespace

AgentNets make_agent(int state_dim, int latent_dim, const AgentOptions& opts, Rng& rng) {
    if (state_dim < 1 || latent_dim < 0)
        throw std::invalid_argument("make_agent: bad dimensions");

    AgentNets agent;
    agent.state_dim = state_dim;
    agent.latent_dim = latent_dim;
    agent.gamma = opts.gamma;
    agent.target_blend = opts.target_blend;
    agent.action_limit = opts.action_limit;
    agent.explore_std = opts.explore_std;

    const int sz = state_dim + latent_dim;
    agent.actor = nn::make_network({sz, opts.hidden, opts.hidden, 1},
                                   {Activation::Relu, Activation::Relu, Activation::Tanh},
                                   rng, opts.final_layer_scale);
    agent.critic = nn::make_network({sz + 1, opts.hidden, opts.hidden, 1},
                                    {Activation::Relu, Activation::Relu, Activation::Identity},
                                    rng, opts.final_layer_scale);
    agent.actor_target = agent.actor;
    agent.critic_target = agent.critic;
    return agent;
}

double select_action(const AgentNets& agent, const Vec& s, const Vec& z, bool explore,
                     Rng& rng) {
    if (s.size() != agent.state_dim) throw std::invalid_argument("state dimension mismatch");
    check_latent(agent, z);

    Vec x(s.size() + z.size());
    x << s, z;
    double a = agent.action_limit * nn::forward(agent.actor, x)[0];
    if (explore) a += rng.normal(agent.explore_std);
    return std::clamp(a, -agent.action_limit, agent.action_limit);
}

double critic_target_value(const AgentNets& agent, double r, const Vec& s_next, const Vec& z,
                           bool done) {
    if (done) return r;
    check_latent(agent, z);

    Vec xa(s_next.size() + z.size());
    xa << s_next, z;
    const double a_next = agent.action_limit * nn::forward(agent.actor_target, xa)[0];

    Vec xq(xa.size() + 1);
    xq << xa, a_next;
    return r + agent.gamma * nn::forward(agent.critic_target, xq)[0];
}

CriticLossResult critic_loss(AgentNets& agent, const std::vector<const Transition*>& batch,
                             const Vec& z) {
    if (batch.empty()) throw std::invalid_argument("critic_loss: empty batch");
    check_latent(agent, z);
    const int n = static_cast<int>(batch.size());

    // Bootstrap targets from the target networks; constant w.r.t. all
    // trainable parameters and the latent.
    Mat x_next = assemble_actor_input(agent, batch, z, true);
    Mat a_next = agent.action_limit * nn::forward(agent.actor_target, x_next);
    Mat xq_next(x_next.rows() + 1, n);
    xq_next.topRows(x_next.rows()) = x_next;
    xq_next.bottomRows(1) = a_next;
    Mat q_next = nn::forward(agent.critic_target, xq_next);

    Vec target(n);
    for (int i = 0; i < n; ++i) {
        target[i] = batch[i]->done ? batch[i]->r
                                   : batch[i]->r + agent.gamma * q_next(0, i);
    }

    Mat xq(agent.state_dim + agent.latent_dim + 1, n);
    for (int i = 0; i < n; ++i) {
        xq.col(i).head(agent.state_dim) = batch[i]->s;
        xq.col(i).segment(agent.state_dim, agent.latent_dim) = z;
        xq.col(i)[agent.state_dim + agent.latent_dim] = batch[i]->a;
    }

    nn::Tape tape;
    Mat q = nn::forward(agent.critic, xq, &tape);

    CriticLossResult result;
    Mat dq(1, n);
    for (int i = 0; i < n; ++i) {
        const double diff = q(0, i) - target[i];
        result.loss += diff * diff;
        dq(0, i) = 2.0 * diff / n;
    }
    result.loss /= n;

    Mat dx = nn::backward(agent.critic, tape, dq);
    result.grad_z = dx.middleRows(agent.state_dim, agent.latent_dim).rowwise().sum();
    return result;
}

double actor_loss(AgentNets& agent, const std::vector<const Transition*>& batch, const Vec& z) {
    if (batch.empty()) throw std::invalid_argument("actor_loss: empty batch");
    check_latent(agent, z);
    const int n = static_cast<int>(batch.size());

    Mat xa = assemble_actor_input(agent, batch, z, false);
    nn::Tape actor_tape;
    Mat a = agent.action_limit * nn::forward(agent.actor, xa, &actor_tape);

    Mat xq(xa.rows() + 1, n);
    xq.topRows(xa.rows()) = xa;
    xq.bottomRows(1) = a;
    nn::Tape critic_tape;
    Mat q = nn::forward(agent.critic, xq, &critic_tape);
    const double objective = q.mean();

    // dJ/dQ = 1/n each; flow through the critic without touching its
    // accumulators, then push the action rows into the actor negated, so the
    // optimizer's descent step ascends the objective.
    Mat dq = Mat::Constant(1, n, 1.0 / n);
    Mat dxq = nn::backward(agent.critic, critic_tape, dq, /*accumulate=*/false);
    Mat da = dxq.bottomRows(1) * agent.action_limit;
    nn::backward(agent.actor, actor_tape, -da);
    return objective;
}

void soft_update_targets(AgentNets& agent, double blend) {
    nn::soft_update(agent.actor_target, agent.actor, blend);
    nn::soft_update(agent.critic_target, agent.critic, blend);
}

}  // namespace metarl
