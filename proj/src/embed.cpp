#include "metarl/embed.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace metarl {

namespace {

using nn::Activation;

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Mean over columns with the addends of each row summed in sorted order, so
// the result is invariant under any permutation of the columns, to the bit.
Vec pooled_mean(const Mat& features) {
    const Eigen::Index rows = features.rows();
    const Eigen::Index cols = features.cols();
    Vec out(rows);
    std::vector<double> row(static_cast<std::size_t>(cols));
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) row[static_cast<std::size_t>(c)] = features(r, c);
        std::sort(row.begin(), row.end());
        double sum = 0.0;
        for (double v : row) sum += v;
        out[r] = sum / static_cast<double>(cols);
    }
    return out;
}

}  // namespace

Encoder make_encoder(int tuple_dim, EmbedMode mode, const EncoderOptions& opts, Rng& rng) {
    if (tuple_dim < 1) throw std::invalid_argument("make_encoder: bad tuple dimension");
    Encoder enc;
    enc.mode = mode;
    enc.tuple_net = nn::make_network({tuple_dim, opts.hidden, opts.hidden, opts.feature},
                                     {Activation::Relu, Activation::Relu, Activation::Relu},
                                     rng);
    const int head_out = mode == EmbedMode::Deterministic ? kLatentDim : 2 * kLatentDim;
    enc.head = nn::make_network({opts.feature, head_out}, {Activation::Identity}, rng);
    return enc;
}

Mat flatten_context(const std::vector<const Transition*>& transitions) {
    if (transitions.empty()) throw std::invalid_argument("flatten_context: empty batch");
    const Eigen::Index sd = transitions.front()->s.size();
    const Eigen::Index dim = 2 * sd + 2;
    Mat c(dim, static_cast<Eigen::Index>(transitions.size()));
    for (std::size_t i = 0; i < transitions.size(); ++i) {
        const Transition& t = *transitions[i];
        if (t.s.size() != sd || t.s_next.size() != sd)
            throw std::invalid_argument("flatten_context: inconsistent state dimensions");
        auto col = c.col(static_cast<Eigen::Index>(i));
        col.head(sd) = t.s;
        col[sd] = t.a;
        col[sd + 1] = t.r;
        col.tail(sd) = t.s_next;
    }
    return c;
}

Mat sample_context_recent(const ReplayBuffer& buffer, int m, int window, Rng& rng) {
    if (buffer.empty()) throw std::runtime_error("sample_context_recent: empty buffer");
    if (m < 1) throw std::invalid_argument("sample_context_recent: m must be >= 1");

    const std::size_t available =
        std::min<std::size_t>(buffer.size(), static_cast<std::size_t>(std::max(window, 1)));
    std::vector<const Transition*> picked;
    picked.reserve(static_cast<std::size_t>(m));
    if (available >= static_cast<std::size_t>(m)) {
        // Partial Fisher-Yates over recency indices: m draws without replacement.
        std::vector<std::size_t> idx(available);
        for (std::size_t i = 0; i < available; ++i) idx[i] = i;
        for (int k = 0; k < m; ++k) {
            const std::size_t j = k + rng.index(available - static_cast<std::size_t>(k));
            std::swap(idx[static_cast<std::size_t>(k)], idx[j]);
            picked.push_back(&buffer.recent(idx[static_cast<std::size_t>(k)]));
        }
    } else {
        for (int k = 0; k < m; ++k) picked.push_back(&buffer.recent(rng.index(available)));
    }
    return flatten_context(picked);
}

Mat cold_start_context(int tuple_dim) { return Mat::Zero(tuple_dim, 1); }

namespace {

// Shared forward: per-tuple features, order-insensitive pooling, linear head.
Vec encoder_head_output(const Encoder& enc, const Mat& context, EncoderTape* tape) {
    if (context.cols() == 0) throw std::invalid_argument("embed: empty context");
    if (context.rows() != enc.tuple_dim())
        throw std::invalid_argument("embed: context tuple dimension mismatch");

    nn::Tape local_tuple_tape;
    nn::Tape local_head_tape;
    nn::Tape* tt = tape ? &tape->tuple_tape : &local_tuple_tape;
    nn::Tape* ht = tape ? &tape->head_tape : &local_head_tape;

    const Mat features = nn::forward(enc.tuple_net, context, tt);
    const Vec pooled = pooled_mean(features);
    const Vec raw = nn::forward(enc.head, Mat(pooled), ht).col(0);
    if (tape) {
        tape->head_raw = raw;
        tape->tuple_count = static_cast<int>(context.cols());
    }
    return raw;
}

}  // namespace

LatentContext embed_deterministic(const Encoder& enc, const Mat& context, EncoderTape* tape) {
    if (enc.mode != EmbedMode::Deterministic)
        throw std::logic_error("embed_deterministic: encoder is probabilistic");
    LatentContext latent;
    latent.mode = EmbedMode::Deterministic;
    latent.z = encoder_head_output(enc, context, tape);
    return latent;
}

LatentContext embed_probabilistic(const Encoder& enc, const Mat& context, Rng& rng,
                                  EncoderTape* tape) {
    if (enc.mode != EmbedMode::Probabilistic)
        throw std::logic_error("embed_probabilistic: encoder is deterministic");
    const Vec raw = encoder_head_output(enc, context, tape);

    LatentContext latent;
    latent.mode = EmbedMode::Probabilistic;
    latent.mean = raw.head(kLatentDim);
    latent.stddev = raw.tail(kLatentDim).unaryExpr([](double x) { return softplus(x); });
    latent.eps = Vec(kLatentDim);
    for (int i = 0; i < kLatentDim; ++i) latent.eps[i] = rng.normal();
    latent.z = latent.mean + latent.stddev.cwiseProduct(latent.eps);
    if (tape) tape->eps = latent.eps;
    return latent;
}

LatentContext embed(const Encoder& enc, const Mat& context, Rng& rng, EncoderTape* tape) {
    return enc.mode == EmbedMode::Deterministic ? embed_deterministic(enc, context, tape)
                                                : embed_probabilistic(enc, context, rng, tape);
}

double latent_penalty(const std::vector<Vec>& z_batch) {
    if (z_batch.empty()) return 0.0;
    double total = 0.0;
    for (const Vec& z : z_batch) total += z.lpNorm<1>();
    return total / static_cast<double>(z_batch.size());
}

namespace {

Vec sign_vec(const Vec& v) {
    return v.unaryExpr([](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

}  // namespace

void encoder_backward(Encoder& enc, const EncoderTape& tape, const LatentContext& latent,
                      const Vec& grad_z, LatentRegularizer reg, double reg_weight) {
    if (grad_z.size() != kLatentDim)
        throw std::invalid_argument("encoder_backward: latent gradient dimension mismatch");
    if (tape.tuple_count < 1)
        throw std::invalid_argument("encoder_backward: tape from a failed forward");

    Vec grad_head;
    if (enc.mode == EmbedMode::Deterministic) {
        grad_head = grad_z;
        if (reg_weight > 0.0) grad_head += reg_weight * sign_vec(latent.z);
    } else {
        // z = mean + softplus(raw_std) .* eps; chain both halves of the head.
        grad_head = Vec(2 * kLatentDim);
        Vec gz = grad_z;
        if (reg_weight > 0.0 && reg == LatentRegularizer::L1)
            gz += reg_weight * sign_vec(latent.z);
        grad_head.head(kLatentDim) = gz;
        for (int i = 0; i < kLatentDim; ++i) {
            const double dstd_draw = sigmoid(tape.head_raw[kLatentDim + i]);
            grad_head[kLatentDim + i] = gz[i] * latent.eps[i] * dstd_draw;
        }
        if (reg_weight > 0.0 && reg == LatentRegularizer::KL) {
            // KL(N(mean, std^2) || N(0, 1)) per component:
            //   d/dmean = mean, d/dstd = std - 1/std.
            for (int i = 0; i < kLatentDim; ++i) {
                grad_head[i] += reg_weight * latent.mean[i];
                const double s = latent.stddev[i];
                const double dstd_draw = sigmoid(tape.head_raw[kLatentDim + i]);
                grad_head[kLatentDim + i] += reg_weight * (s - 1.0 / s) * dstd_draw;
            }
        }
    }

    const Mat grad_pooled = nn::backward(enc.head, tape.head_tape, Mat(grad_head));
    // Mean pooling distributes the gradient uniformly over the tuples.
    const Mat grad_features =
        grad_pooled.col(0).replicate(1, tape.tuple_count) / static_cast<double>(tape.tuple_count);
    nn::backward(enc.tuple_net, tape.tuple_tape, grad_features);
}

std::uint64_t encoder_checksum(const Encoder& enc) {
    return nn::checksum(enc.tuple_net) ^ (nn::checksum(enc.head) * 0x9e3779b97f4a7c15ULL);
}

}  // namespace metarl
