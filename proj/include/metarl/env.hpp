#pragma once

#include "metarl/plant.hpp"
#include "metarl/replay.hpp"
#include "metarl/types.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace metarl {

/// Weights of the extended tracking reward. All zero reduces it to the
/// plain negative absolute error.
struct RewardConfig {
    double alpha = 0.0;        // action-change penalty weight
    double beta_action = 0.0;  // action-magnitude penalty weight
    double delta = 0.0;        // overshoot penalty magnitude
    // Keeps the literal printed sign convention of the overshoot case table
    // instead of the prose definition (sign change relative to the reference).
    bool overshoot_sign_as_printed = false;
};

enum class StateVariant {
    MetaBase,           // (y_t..y_{t-3}, e_t, I_t)                              dim 6
    NoEmbedDynamics,    // + (a_{t-1}..a_{t-4}) between outputs and e_t          dim 10
    NoEmbedObjectives,  // + (r_{t-1}..r_{t-4}) between actions and e_t          dim 14
};

int state_dim(StateVariant variant);

enum class TaskRole { Train, Test };

/// One draw from the task distribution: a plant plus a control objective.
struct Task {
    int id = 0;
    TransferFunctionSpec plant;
    RewardConfig reward;
    TaskRole role = TaskRole::Train;
};

struct SetpointSchedule {
    std::vector<double> values;
    int steps_per_setpoint = 20;

    int total_steps() const {
        return static_cast<int>(values.size()) * steps_per_setpoint;
    }
    bool change_at(int step) const {
        return step % steps_per_setpoint == 0 &&
               step / steps_per_setpoint < static_cast<int>(values.size());
    }
    double value_at(int step) const { return values[step / steps_per_setpoint]; }
};

/// Per-episode bookkeeping: fixed-length histories, the running error
/// integral, and the post-setpoint-change reference output.
struct EpisodeState {
    Vec4 outputs = Vec4::Zero();  // y_t, y_{t-1}, y_{t-2}, y_{t-3}
    Vec4 actions = Vec4::Zero();  // a_{t-1}..a_{t-4}
    Vec4 rewards = Vec4::Zero();  // r_{t-1}..r_{t-4}
    double setpoint = 0.0;
    double integral = 0.0;   // sum of e_k * dt over the episode
    double reference = 0.0;  // output measured at the latest setpoint change
    int step_index = 0;
    SetpointSchedule schedule;
};

/// Assembles the task-facing state vector for the given variant.
Vec build_state(const EpisodeState& ep, StateVariant variant);

/// Negative absolute setpoint tracking error.
inline double reward_basic(double tracking_error) { return -std::abs(tracking_error); }

/// Extended reward: -( |y_sp - y| + alpha|a - a_prev| + beta|a| + overshoot ).
/// The overshoot term fires when the tracking error has changed sign relative
/// to the reference output recorded at the last setpoint change.
double reward_extended(double y_sp, double y, double a, double a_prev, double y_ref,
                       const RewardConfig& cfg);

/// n_changes setpoints drawn uniformly from [low, high], consecutive values
/// distinct, each held for steps_per_setpoint samples.
SetpointSchedule setpoint_schedule(Rng& rng, int n_changes, double low, double high,
                                   int steps_per_setpoint);

/// Resets the plant and episode bookkeeping. Output history is padded with
/// the initial measured output; action and reward histories with zeros.
EpisodeState start_episode(PlantModel& plant, const SetpointSchedule& schedule,
                           double initial_output = 0.0);

/// Applies one control action: steps the plant, evaluates the task's reward,
/// updates histories and the setpoint schedule, and emits the transition.
/// The action is clamped to [-u_max, u_max]; non-finite actions throw.
Transition env_step(const Task& task, PlantModel& plant, EpisodeState& ep, double action,
                    StateVariant variant, double u_max, Rng& noise_rng);

enum class Experiment { BinaryGain, FirstOrderDynamics, ControlObjectives };

Experiment parse_experiment(const std::string& name);

/// The built-in task sets for the three experiments, with the held-out test
/// task last where one exists.
std::vector<Task> make_task_set(Experiment experiment);

/// First-order task grid: all (gain, tau) combinations as train tasks except
/// the held-out pair, which is appended as the test task.
std::vector<Task> make_first_order_tasks(const std::vector<double>& gains,
                                         const std::vector<double>& time_constants,
                                         double heldout_gain, double heldout_tau);

/// Fixed-plant task set spanning four control objectives plus the combined
/// test objective.
std::vector<Task> make_objective_tasks(const TransferFunctionSpec& plant, double alpha,
                                       double beta_action, double delta, double test_alpha,
                                       double test_beta);

std::vector<Task> train_tasks(const std::vector<Task>& tasks);
const Task& test_task(const std::vector<Task>& tasks);

}  // namespace metarl
