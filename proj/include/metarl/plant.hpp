#pragma once

#include "metarl/types.hpp"

namespace metarl {

/// Continuous-time SISO plant K / (tau*s + 1)^n.
struct TransferFunctionSpec {
    double gain = 1.0;           // K, nonzero
    double time_constant = 1.0;  // tau in seconds, positive
    int order = 1;               // n >= 1
};

/// Discrete-time realization of a TransferFunctionSpec: a cascade of
/// first-order stages sampled at a fixed interval, plus additive Gaussian
/// measurement noise on the output.
///
/// Stage update: x+ = a*x + b*(stage input), a = exp(-dt/tau), b = 1 - a,
/// with the gain K applied to the input of the first stage. Each stage has
/// unit DC gain, so a constant input u settles every state at K*u.
struct PlantModel {
    Vec pole_coeffs;   // a_i per stage, all in (0, 1)
    Vec input_coeffs;  // b_i = 1 - a_i per stage
    double gain = 1.0;
    Vec state;         // one internal state per stage; last stage is the output
    double dt = 0.5;
    double noise_std = 0.0;

    int order() const { return static_cast<int>(state.size()); }
};

/// Builds the discrete model for `spec` at sample interval `dt`.
/// Throws std::invalid_argument when the spec or dt is invalid.
PlantModel discretize(const TransferFunctionSpec& spec, double dt, double noise_std);

/// Advances the cascade one sample under control input `u` and returns the
/// measured output (final stage state plus noise). Noise is drawn from `rng`
/// only when noise_std > 0, so noise-free models never touch the stream.
double step(PlantModel& model, double u, Rng& rng);

/// Sets every stage state to `initial_output`, so the noise-free output
/// equals it. dt and noise_std are preserved.
void reset(PlantModel& model, double initial_output = 0.0);

}  // namespace metarl
