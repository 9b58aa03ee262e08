#pragma once

#include "metarl/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace metarl::nn {

enum class Activation { Identity, Relu, Tanh };

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// One dense layer with its gradient accumulator and Adam moments.
/// Weights are out x in; batches are stored column-wise.
struct Layer {
    Mat weights;
    Vec bias;
    Activation activation = Activation::Identity;

    Mat grad_weights;
    Vec grad_bias;
    Mat m_weights, v_weights;
    Vec m_bias, v_bias;
};

struct Network {
    std::vector<Layer> layers;
    std::int64_t adam_steps = 0;

    int input_dim() const { return static_cast<int>(layers.front().weights.cols()); }
    int output_dim() const { return static_cast<int>(layers.back().weights.rows()); }
};

/// Activation record from a forward pass, consumed by backward().
struct Tape {
    std::vector<Mat> inputs;   // input to each layer, columns = samples
    std::vector<Mat> preacts;  // W*x + b per layer
    int batch = 0;
};

/// Builds a network with the given layer dimensions and per-layer activations
/// (acts.size() == dims.size() - 1). Hidden layers use uniform fan-in
/// initialization; the final layer uses U(-final_layer_scale, +final_layer_scale)
/// when final_layer_scale > 0.
Network make_network(const std::vector<int>& dims, const std::vector<Activation>& acts,
                     Rng& rng, double final_layer_scale = 0.0);

/// Forward pass on a column batch. Fills `tape` when non-null.
Mat forward(const Network& net, const Mat& x, Tape* tape = nullptr);
Vec forward(const Network& net, const Vec& x);

/// Reverse pass: accumulates parameter gradients (unless accumulate = false)
/// and returns the gradient with respect to the input batch.
Mat backward(Network& net, const Tape& tape, const Mat& grad_output, bool accumulate = true);

void zero_gradients(Network& net);

/// Adam update from the accumulated gradients; zeroes the accumulators.
void optimizer_step(Network& net, const AdamConfig& cfg);

/// target <- blend * online + (1 - blend) * target, elementwise.
void soft_update(Network& target, const Network& online, double blend);

std::size_t parameter_count(const Network& net);

/// FNV-1a over the parameter bit patterns (weights and biases only).
std::uint64_t checksum(const Network& net);

/// Binary serialization with shape headers; round-trips are bit-exact.
/// Adam moments and step count are included.
void save(std::ostream& out, const Network& net);
Network load(std::istream& in);

}  // namespace metarl::nn
