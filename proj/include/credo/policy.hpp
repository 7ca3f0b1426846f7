#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "credo/rng.hpp"

namespace credo::policy {

inline constexpr int kAlphabet = 4;  // A, C, G, T
inline constexpr int kBosSymbol = 4;
inline constexpr int kNumSymbols = 5;

struct Shape {
    int context_window = 8;
    int embedding_dim = 16;
    int hidden_size = 64;

    friend bool operator==(const Shape&, const Shape&) = default;
};

// Fixed-context autoregressive scorer: the last `context_window` symbols
// (BOS-padded on the left) are embedded, concatenated, and passed through
// one tanh layer to 4 logits. Small enough for exact analytic gradients in
// 64-bit floats.
struct PolicyParams {
    Shape shape;
    std::vector<double> embedding;  // kNumSymbols x d
    std::vector<double> w1;         // (w*d) x H, row-major by input index
    std::vector<double> b1;         // H
    std::vector<double> w2;         // H x 4, row-major by hidden index
    std::vector<double> b2;         // 4

    size_t param_count() const;
    void set_zero();
    double* flat(size_t index);              // linear view over all parameters
    const double* flat(size_t index) const;
    double squared_norm() const;
    void axpy(double a, const PolicyParams& other);  // this += a * other
    void scale(double a);

    friend bool operator==(const PolicyParams&, const PolicyParams&) = default;
};

// Random tanh layer, zero output layer: the initial policy is exactly uniform.
PolicyParams init_params(const Shape& shape, uint64_t seed);
PolicyParams zeros_like(const PolicyParams& params);

// Last `context_window` symbol indices of a prefix, left-padded with BOS.
struct StateEncoding {
    std::vector<int> context;
    int position = 0;  // number of bases already emitted
};

StateEncoding encode_state(std::string_view prefix, int context_window);

std::array<double, 4> logits(const PolicyParams& params, const StateEncoding& state);
std::array<double, 4> softmax(const std::array<double, 4>& logits);

struct SampleResult {
    std::string sequence;
    std::vector<double> step_logprobs;
    std::vector<double> step_entropies;
};

SampleResult sample_sequence(const PolicyParams& params, int length, Rng& rng);

// Mean over the batch of the summed per-step negative log-likelihood, with
// its exact gradient.
struct LossAndGrad {
    double loss = 0.0;
    PolicyParams grad;
};

LossAndGrad nll_and_grad(const PolicyParams& params, const std::vector<std::string>& batch);

// Accumulates w_logp * sum_i ln pi(a_i|s) + w_ent * sum_i H_i for one fixed
// sequence into (loss, grad). The policy-gradient building block shared by
// pretraining and the RL update.
void accumulate_weighted_episode(const PolicyParams& params, std::string_view sequence,
                                 double w_logp, double w_ent, double& loss, PolicyParams& grad);

// Sum of per-step log-probs and entropies of a fixed sequence.
void episode_scores(const PolicyParams& params, std::string_view sequence, double& sum_logprob,
                    double& sum_entropy);

struct PretrainConfig {
    int epochs = 6;
    double lr = 0.05;
    int batch_size = 64;
    double clip_norm = 1.0;
    uint64_t seed = 3;
};

struct PretrainResult {
    PolicyParams params;
    std::vector<double> epoch_losses;
};

// Minibatch SGD on the NLL with gradient-norm clipping. Throws if the loss
// goes non-finite.
PretrainResult pretrain(const PolicyParams& params, const std::vector<std::string>& sequences,
                        const PretrainConfig& config);

// Rescale grad in place so its global norm is at most clip_norm.
void clip_gradient(PolicyParams& grad, double clip_norm);

nlohmann::json params_to_json(const PolicyParams& params);
PolicyParams params_from_json(const nlohmann::json& j);

}  // namespace credo::policy
