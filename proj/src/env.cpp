#include "metarl/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace metarl {

int state_dim(StateVariant variant) {
    switch (variant) {
        case StateVariant::MetaBase: return 6;
        case StateVariant::NoEmbedDynamics: return 10;
        case StateVariant::NoEmbedObjectives: return 14;
    }
    throw std::logic_error("unknown state variant");
}

Vec build_state(const EpisodeState& ep, StateVariant variant) {
    Vec s(state_dim(variant));
    const double e = ep.setpoint - ep.outputs[0];
    switch (variant) {
        case StateVariant::MetaBase:
            s << ep.outputs, e, ep.integral;
            break;
        case StateVariant::NoEmbedDynamics:
            s << ep.outputs, ep.actions, e, ep.integral;
            break;
        case StateVariant::NoEmbedObjectives:
            s << ep.outputs, ep.actions, ep.rewards, e, ep.integral;
            break;
    }
    return s;
}

double reward_extended(double y_sp, double y, double a, double a_prev, double y_ref,
                       const RewardConfig& cfg) {
    double cost = std::abs(y_sp - y) + cfg.alpha * std::abs(a - a_prev) +
                  cfg.beta_action * std::abs(a);
    if (cfg.delta > 0.0) {
        const double product = (y_sp - y) * (y_sp - y_ref);
        const bool overshoot = cfg.overshoot_sign_as_printed ? product > 0.0 : product < 0.0;
        if (overshoot) cost += cfg.delta;
    }
    return -cost;
}

SetpointSchedule setpoint_schedule(Rng& rng, int n_changes, double low, double high,
                                   int steps_per_setpoint) {
    if (n_changes < 1) throw std::invalid_argument("setpoint_schedule: n_changes must be >= 1");
    if (!(low < high)) throw std::invalid_argument("setpoint_schedule: low must be < high");
    if (steps_per_setpoint < 1)
        throw std::invalid_argument("setpoint_schedule: steps_per_setpoint must be >= 1");

    SetpointSchedule sched;
    sched.steps_per_setpoint = steps_per_setpoint;
    sched.values.reserve(static_cast<std::size_t>(n_changes));
    for (int i = 0; i < n_changes; ++i) {
        double v = rng.uniform(low, high);
        while (!sched.values.empty() && v == sched.values.back()) v = rng.uniform(low, high);
        sched.values.push_back(v);
    }
    return sched;
}

EpisodeState start_episode(PlantModel& plant, const SetpointSchedule& schedule,
                           double initial_output) {
    if (schedule.values.empty())
        throw std::invalid_argument("start_episode: empty setpoint schedule");
    reset(plant, initial_output);
    EpisodeState ep;
    ep.outputs.setConstant(initial_output);
    ep.schedule = schedule;
    ep.setpoint = schedule.values.front();
    ep.reference = initial_output;
    return ep;
}

namespace {

void push_front(Vec4& hist, double value) {
    hist.tail<3>() = hist.head<3>().eval();
    hist[0] = value;
}

}  // namespace

Transition env_step(const Task& task, PlantModel& plant, EpisodeState& ep, double action,
                    StateVariant variant, double u_max, Rng& noise_rng) {
    if (!std::isfinite(action)) throw std::invalid_argument("env_step: non-finite action");
    const double a = std::clamp(action, -u_max, u_max);

    Transition tr;
    tr.task_id = task.id;
    tr.s = build_state(ep, variant);
    tr.a = a;

    const double a_prev = ep.actions[0];
    const double y = step(plant, a, noise_rng);
    tr.r = reward_extended(ep.setpoint, y, a, a_prev, ep.reference, task.reward);

    push_front(ep.outputs, y);
    push_front(ep.actions, a);
    push_front(ep.rewards, tr.r);
    ep.integral += (ep.setpoint - y) * plant.dt;
    ep.step_index += 1;

    tr.done = ep.step_index >= ep.schedule.total_steps();
    if (!tr.done && ep.schedule.change_at(ep.step_index)) {
        ep.setpoint = ep.schedule.value_at(ep.step_index);
        ep.reference = y;
    }

    tr.s_next = build_state(ep, variant);
    return tr;
}

Experiment parse_experiment(const std::string& name) {
    if (name == "binary-gain") return Experiment::BinaryGain;
    if (name == "first-order") return Experiment::FirstOrderDynamics;
    if (name == "objectives") return Experiment::ControlObjectives;
    throw std::invalid_argument("unknown experiment: " + name);
}

std::vector<Task> make_task_set(Experiment experiment) {
    switch (experiment) {
        case Experiment::BinaryGain:
            return {Task{0, {1.0, 1.0, 1}, {}, TaskRole::Train},
                    Task{1, {-1.0, 1.0, 1}, {}, TaskRole::Train}};
        case Experiment::FirstOrderDynamics:
            return make_first_order_tasks({-2.0, -1.0, 1.0, 2.0}, {0.5, 1.0, 1.5, 2.0},
                                          -1.0, 2.0);
        case Experiment::ControlObjectives:
            return make_objective_tasks({1.0, 1.0, 3}, 0.1, 0.1, 0.5, 0.1, 0.1);
    }
    throw std::logic_error("unknown experiment");
}

std::vector<Task> make_first_order_tasks(const std::vector<double>& gains,
                                         const std::vector<double>& time_constants,
                                         double heldout_gain, double heldout_tau) {
    std::vector<Task> tasks;
    int id = 0;
    for (double k : gains)
        for (double tau : time_constants) {
            if (k == heldout_gain && tau == heldout_tau) continue;
            tasks.push_back(Task{id++, {k, tau, 1}, {}, TaskRole::Train});
        }
    tasks.push_back(Task{id, {heldout_gain, heldout_tau, 1}, {}, TaskRole::Test});
    return tasks;
}

std::vector<Task> make_objective_tasks(const TransferFunctionSpec& plant, double alpha,
                                       double beta_action, double delta, double test_alpha,
                                       double test_beta) {
    std::vector<Task> tasks;
    tasks.push_back(Task{0, plant, RewardConfig{}, TaskRole::Train});
    tasks.push_back(Task{1, plant, RewardConfig{alpha, 0.0, 0.0}, TaskRole::Train});
    tasks.push_back(Task{2, plant, RewardConfig{0.0, beta_action, 0.0}, TaskRole::Train});
    tasks.push_back(Task{3, plant, RewardConfig{0.0, 0.0, delta}, TaskRole::Train});
    tasks.push_back(Task{4, plant, RewardConfig{test_alpha, test_beta, 0.0}, TaskRole::Test});
    return tasks;
}

std::vector<Task> train_tasks(const std::vector<Task>& tasks) {
    std::vector<Task> out;
    for (const Task& t : tasks)
        if (t.role == TaskRole::Train) out.push_back(t);
    return out;
}

const Task& test_task(const std::vector<Task>& tasks) {
    for (const Task& t : tasks)
        if (t.role == TaskRole::Test) return t;
    throw std::runtime_error("task set has no test task");
}

}  // namespace metarl
