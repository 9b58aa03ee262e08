#pragma once

#include "metarl/nn.hpp"
#include "metarl/replay.hpp"
#include "metarl/types.hpp"

#include <vector>

namespace metarl {

enum class EmbedMode { Deterministic, Probabilistic };

inline constexpr int kLatentDim = 3;

/// The embedding output: a point z in R^3, plus the diagonal-Gaussian
/// posterior and recorded noise when probabilistic.
struct LatentContext {
    EmbedMode mode = EmbedMode::Deterministic;
    Vec z;
    Vec mean;    // probabilistic only
    Vec stddev;  // probabilistic only, componentwise positive
    Vec eps;     // recorded reparameterization noise
};

/// Per-tuple feature network plus a pooled head. The head emits z directly in
/// deterministic mode, or (mean, raw std) rows in probabilistic mode with the
/// std made positive through softplus.
struct Encoder {
    nn::Network tuple_net;  // context tuple -> feature vector, shared across tuples
    nn::Network head;       // pooled feature -> 3 or 6 outputs
    EmbedMode mode = EmbedMode::Deterministic;

    int tuple_dim() const { return tuple_net.input_dim(); }
    int feature_dim() const { return tuple_net.output_dim(); }
};

struct EncoderOptions {
    int hidden = 64;
    int feature = 32;
};

Encoder make_encoder(int tuple_dim, EmbedMode mode, const EncoderOptions& opts, Rng& rng);

/// Activation record for one embedding pass, consumed by encoder_backward.
struct EncoderTape {
    nn::Tape tuple_tape;
    nn::Tape head_tape;
    Vec head_raw;  // head preactivation row (equals output; head is linear)
    Vec eps;
    int tuple_count = 0;
};

/// Flattens transitions into context tuples (s, a, r, s'), one per column.
Mat flatten_context(const std::vector<const Transition*>& transitions);

/// M tuples from the `window` most recent insertions: without replacement
/// when enough are available, with replacement otherwise. Throws on an empty
/// buffer.
Mat sample_context_recent(const ReplayBuffer& buffer, int m, int window, Rng& rng);

/// The placeholder context used before a task has produced any data: a
/// single all-zero tuple.
Mat cold_start_context(int tuple_dim);

LatentContext embed_deterministic(const Encoder& enc, const Mat& context,
                                  EncoderTape* tape = nullptr);
LatentContext embed_probabilistic(const Encoder& enc, const Mat& context, Rng& rng,
                                  EncoderTape* tape = nullptr);
LatentContext embed(const Encoder& enc, const Mat& context, Rng& rng,
                    EncoderTape* tape = nullptr);

/// Mean L1 norm of the latent points in the batch.
double latent_penalty(const std::vector<Vec>& z_batch);

enum class LatentRegularizer { L1, KL };

/// Chains a gradient with respect to z back through the head, the pooling,
/// and the per-tuple network, accumulating into both networks. The
/// regularizer term (weight > 0) is added internally: L1 on the sampled z, or
/// KL to a standard normal prior in probabilistic mode.
void encoder_backward(Encoder& enc, const EncoderTape& tape, const LatentContext& latent,
                      const Vec& grad_z, LatentRegularizer reg = LatentRegularizer::L1,
                      double reg_weight = 0.0);

std::uint64_t encoder_checksum(const Encoder& enc);

}  // namespace metarl
