#include "metarl/nn.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace metarl::nn {

namespace {

Mat apply_activation(Activation act, const Mat& z) {
    switch (act) {
        case Activation::Identity: return z;
        case Activation::Relu: return z.cwiseMax(0.0);
        case Activation::Tanh: return z.array().tanh().matrix();
    }
    throw std::logic_error("unknown activation");
}

// Derivative evaluated at the preactivation.
Mat activation_grad(Activation act, const Mat& z) {
    switch (act) {
        case Activation::Identity: return Mat::Ones(z.rows(), z.cols());
        case Activation::Relu: return (z.array() > 0.0).cast<double>().matrix();
        case Activation::Tanh: return (1.0 - z.array().tanh().square()).matrix();
    }
    throw std::logic_error("unknown activation");
}

void fill_uniform(Mat& m, Rng& rng, double lo, double hi) {
    double* p = m.data();
    for (Eigen::Index i = 0; i < m.size(); ++i) p[i] = rng.uniform(lo, hi);
}

void fill_uniform(Vec& v, Rng& rng, double lo, double hi) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(lo, hi);
}

}  // namespace

Network make_network(const std::vector<int>& dims, const std::vector<Activation>& acts,
                     Rng& rng, double final_layer_scale) {
    if (dims.size() < 2 || acts.size() != dims.size() - 1)
        throw std::invalid_argument("make_network: dims/acts mismatch");

    Network net;
    net.layers.resize(acts.size());
    for (std::size_t l = 0; l < acts.size(); ++l) {
        Layer& layer = net.layers[l];
        const int in = dims[l];
        const int out = dims[l + 1];
        if (in < 1 || out < 1) throw std::invalid_argument("make_network: bad layer dim");

        layer.weights.resize(out, in);
        layer.bias.resize(out);
        layer.activation = acts[l];

        const bool last = (l + 1 == acts.size());
        const double scale = (last && final_layer_scale > 0.0)
                                 ? final_layer_scale
                                 : 1.0 / std::sqrt(static_cast<double>(in));
        fill_uniform(layer.weights, rng, -scale, scale);
        fill_uniform(layer.bias, rng, -scale, scale);

        layer.grad_weights = Mat::Zero(out, in);
        layer.grad_bias = Vec::Zero(out);
        layer.m_weights = Mat::Zero(out, in);
        layer.v_weights = Mat::Zero(out, in);
        layer.m_bias = Vec::Zero(out);
        layer.v_bias = Vec::Zero(out);
    }
    return net;
}

Mat forward(const Network& net, const Mat& x, Tape* tape) {
    if (x.rows() != net.input_dim())
        throw std::invalid_argument("forward: input dimension mismatch");

    if (tape) {
        tape->inputs.clear();
        tape->preacts.clear();
        tape->inputs.reserve(net.layers.size());
        tape->preacts.reserve(net.layers.size());
        tape->batch = static_cast<int>(x.cols());
    }

    Mat h = x;
    for (const Layer& layer : net.layers) {
        Mat z = (layer.weights * h).colwise() + layer.bias;
        if (tape) {
            tape->inputs.push_back(std::move(h));
            tape->preacts.push_back(z);
        }
        h = apply_activation(layer.activation, z);
    }
    return h;
}

Vec forward(const Network& net, const Vec& x) {
    return Vec(forward(net, Mat(x), nullptr));
}

Mat backward(Network& net, const Tape& tape, const Mat& grad_output, bool accumulate) {
    const std::size_t n = net.layers.size();
    if (tape.inputs.size() != n || tape.preacts.size() != n)
        throw std::invalid_argument("backward: tape does not match network");
    if (grad_output.rows() != net.output_dim() || grad_output.cols() != tape.batch)
        throw std::invalid_argument("backward: gradient shape mismatch");

    Mat grad = grad_output;
    for (std::size_t l = n; l-- > 0;) {
        Layer& layer = net.layers[l];
        if (tape.inputs[l].rows() != layer.weights.cols())
            throw std::invalid_argument("backward: stale tape");

        const Mat dz = grad.cwiseProduct(activation_grad(layer.activation, tape.preacts[l]));
        if (accumulate) {
            layer.grad_weights.noalias() += dz * tape.inputs[l].transpose();
            layer.grad_bias.noalias() += dz.rowwise().sum();
        }
        grad.noalias() = layer.weights.transpose() * dz;
    }
    return grad;
}

void zero_gradients(Network& net) {
    for (Layer& layer : net.layers) {
        layer.grad_weights.setZero();
        layer.grad_bias.setZero();
    }
}

namespace {

template <typename Dense>
void adam_update(Dense& param, Dense& grad, Dense& m, Dense& v, const AdamConfig& cfg,
                 double corr1, double corr2) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
    param.array() -= cfg.learning_rate * (m.array() / corr1) /
                     ((v.array() / corr2).sqrt() + cfg.epsilon);
    grad.setZero();
}

}  // namespace

void optimizer_step(Network& net, const AdamConfig& cfg) {
    net.adam_steps += 1;
    const double t = static_cast<double>(net.adam_steps);
    const double corr1 = 1.0 - std::pow(cfg.beta1, t);
    const double corr2 = 1.0 - std::pow(cfg.beta2, t);
    for (Layer& layer : net.layers) {
        adam_update(layer.weights, layer.grad_weights, layer.m_weights, layer.v_weights,
                    cfg, corr1, corr2);
        adam_update(layer.bias, layer.grad_bias, layer.m_bias, layer.v_bias,
                    cfg, corr1, corr2);
    }
}

void soft_update(Network& target, const Network& online, double blend) {
    if (target.layers.size() != online.layers.size())
        throw std::invalid_argument("soft_update: structure mismatch");
    for (std::size_t l = 0; l < target.layers.size(); ++l) {
        target.layers[l].weights =
            blend * online.layers[l].weights + (1.0 - blend) * target.layers[l].weights;
        target.layers[l].bias =
            blend * online.layers[l].bias + (1.0 - blend) * target.layers[l].bias;
    }
}

std::size_t parameter_count(const Network& net) {
    std::size_t n = 0;
    for (const Layer& layer : net.layers)
        n += static_cast<std::size_t>(layer.weights.size() + layer.bias.size());
    return n;
}

namespace {

std::uint64_t fnv1a(std::uint64_t h, const double* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, &data[i], sizeof(bits));
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffULL;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

}  // namespace

std::uint64_t checksum(const Network& net) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const Layer& layer : net.layers) {
        h = fnv1a(h, layer.weights.data(), static_cast<std::size_t>(layer.weights.size()));
        h = fnv1a(h, layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
    }
    return h;
}

namespace {

template <typename T>
void write_raw(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("network deserialization: truncated stream");
    return value;
}

void write_mat(std::ostream& out, const Mat& m) {
    write_raw<std::int32_t>(out, static_cast<std::int32_t>(m.rows()));
    write_raw<std::int32_t>(out, static_cast<std::int32_t>(m.cols()));
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(sizeof(double) * m.size()));
}

Mat read_mat(std::istream& in) {
    const auto rows = read_raw<std::int32_t>(in);
    const auto cols = read_raw<std::int32_t>(in);
    if (rows < 0 || cols < 0) throw std::runtime_error("network deserialization: bad shape");
    Mat m(rows, cols);
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
    if (!in) throw std::runtime_error("network deserialization: truncated stream");
    return m;
}

}  // namespace

void save(std::ostream& out, const Network& net) {
    write_raw<std::uint32_t>(out, 0x4d4e4554u);  // "TENM"
    write_raw<std::int32_t>(out, static_cast<std::int32_t>(net.layers.size()));
    write_raw<std::int64_t>(out, net.adam_steps);
    for (const Layer& layer : net.layers) {
        write_raw<std::uint8_t>(out, static_cast<std::uint8_t>(layer.activation));
        write_mat(out, layer.weights);
        write_mat(out, Mat(layer.bias));
        write_mat(out, layer.m_weights);
        write_mat(out, layer.v_weights);
        write_mat(out, Mat(layer.m_bias));
        write_mat(out, Mat(layer.v_bias));
    }
}

Network load(std::istream& in) {
    if (read_raw<std::uint32_t>(in) != 0x4d4e4554u)
        throw std::runtime_error("network deserialization: bad magic");
    const auto n_layers = read_raw<std::int32_t>(in);
    if (n_layers < 1) throw std::runtime_error("network deserialization: bad layer count");

    Network net;
    net.adam_steps = read_raw<std::int64_t>(in);
    net.layers.resize(static_cast<std::size_t>(n_layers));
    for (Layer& layer : net.layers) {
        layer.activation = static_cast<Activation>(read_raw<std::uint8_t>(in));
        layer.weights = read_mat(in);
        layer.bias = Vec(read_mat(in));
        layer.m_weights = read_mat(in);
        layer.v_weights = read_mat(in);
        layer.m_bias = Vec(read_mat(in));
        layer.v_bias = Vec(read_mat(in));
        layer.grad_weights = Mat::Zero(layer.weights.rows(), layer.weights.cols());
        layer.grad_bias = Vec::Zero(layer.bias.size());
    }
    return net;
}

}  // namespace metarl::nn
