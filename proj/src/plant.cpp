#include "metarl/plant.hpp"

#include <cmath>
#include <stdexcept>

namespace metarl {

PlantModel discretize(const TransferFunctionSpec& spec, double dt, double noise_std) {
    if (!(spec.time_constant > 0.0))
        throw std::invalid_argument("discretize: time_constant must be positive");
    if (!(dt > 0.0))
        throw std::invalid_argument("discretize: dt must be positive");
    if (spec.order < 1)
        throw std::invalid_argument("discretize: order must be >= 1");
    if (spec.gain == 0.0 || !std::isfinite(spec.gain))
        throw std::invalid_argument("discretize: gain must be finite and nonzero");
    if (!(noise_std >= 0.0))
        throw std::invalid_argument("discretize: noise_std must be non-negative");

    const double a = std::exp(-dt / spec.time_constant);
    PlantModel model;
    model.pole_coeffs = Vec::Constant(spec.order, a);
    model.input_coeffs = Vec::Constant(spec.order, 1.0 - a);
    model.gain = spec.gain;
    model.state = Vec::Zero(spec.order);
    model.dt = dt;
    model.noise_std = noise_std;
    return model;
}

double step(PlantModel& model, double u, Rng& rng) {
    if (!std::isfinite(u))
        throw std::invalid_argument("step: control input must be finite");

    // Stage inputs are sampled at the interval start and held, so every
    // stage reads the previous value of the stage before it.
    const Vec prev = model.state;
    const int n = model.order();
    for (int i = 0; i < n; ++i) {
        const double stage_input = (i == 0) ? model.gain * u : prev[i - 1];
        model.state[i] = model.pole_coeffs[i] * prev[i] + model.input_coeffs[i] * stage_input;
    }
    double y = model.state[n - 1];
    if (model.noise_std > 0.0) y += rng.normal(model.noise_std);
    return y;
}

void reset(PlantModel& model, double initial_output) {
    model.state.setConstant(initial_output);
}

}  // namespace metarl
