#include "credo/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "credo/motifs.hpp"

namespace credo::policy {

namespace {

struct Slices {
    size_t emb, w1, b1, w2, b2, total;
};

Slices slices(const Shape& s) {
    Slices out{};
    out.emb = static_cast<size_t>(kNumSymbols) * s.embedding_dim;
    out.w1 = static_cast<size_t>(s.context_window) * s.embedding_dim * s.hidden_size;
    out.b1 = static_cast<size_t>(s.hidden_size);
    out.w2 = static_cast<size_t>(s.hidden_size) * kAlphabet;
    out.b2 = kAlphabet;
    out.total = out.emb + out.w1 + out.b1 + out.w2 + out.b2;
    return out;
}

}  // namespace

size_t PolicyParams::param_count() const { return slices(shape).total; }

void PolicyParams::set_zero() {
    std::fill(embedding.begin(), embedding.end(), 0.0);
    std::fill(w1.begin(), w1.end(), 0.0);
    std::fill(b1.begin(), b1.end(), 0.0);
    std::fill(w2.begin(), w2.end(), 0.0);
    std::fill(b2.begin(), b2.end(), 0.0);
}

double* PolicyParams::flat(size_t index) {
    const Slices s = slices(shape);
    if (index < s.emb) return &embedding[index];
    index -= s.emb;
    if (index < s.w1) return &w1[index];
    index -= s.w1;
    if (index < s.b1) return &b1[index];
    index -= s.b1;
    if (index < s.w2) return &w2[index];
    index -= s.w2;
    if (index < s.b2) return &b2[index];
    throw std::out_of_range("PolicyParams::flat index out of range");
}

const double* PolicyParams::flat(size_t index) const {
    return const_cast<PolicyParams*>(this)->flat(index);
}

double PolicyParams::squared_norm() const {
    double s = 0.0;
    for (double v : embedding) s += v * v;
    for (double v : w1) s += v * v;
    for (double v : b1) s += v * v;
    for (double v : w2) s += v * v;
    for (double v : b2) s += v * v;
    return s;
}

void PolicyParams::axpy(double a, const PolicyParams& other) {
    if (!(shape == other.shape)) throw std::invalid_argument("axpy: shape mismatch");
    for (size_t i = 0; i < embedding.size(); ++i) embedding[i] += a * other.embedding[i];
    for (size_t i = 0; i < w1.size(); ++i) w1[i] += a * other.w1[i];
    for (size_t i = 0; i < b1.size(); ++i) b1[i] += a * other.b1[i];
    for (size_t i = 0; i < w2.size(); ++i) w2[i] += a * other.w2[i];
    for (size_t i = 0; i < b2.size(); ++i) b2[i] += a * other.b2[i];
}

void PolicyParams::scale(double a) {
    for (auto& v : embedding) v *= a;
    for (auto& v : w1) v *= a;
    for (auto& v : b1) v *= a;
    for (auto& v : w2) v *= a;
    for (auto& v : b2) v *= a;
}

PolicyParams init_params(const Shape& shape, uint64_t seed) {
    if (shape.context_window < 1 || shape.embedding_dim < 1 || shape.hidden_size < 1)
        throw std::invalid_argument("init_params: invalid shape");
    PolicyParams p;
    p.shape = shape;
    const Slices s = slices(shape);
    p.embedding.resize(s.emb);
    p.w1.resize(s.w1);
    p.b1.assign(s.b1, 0.0);
    p.w2.assign(s.w2, 0.0);  // zero output layer -> exactly uniform start
    p.b2.assign(s.b2, 0.0);

    Rng rng(mix_seed(seed, 0x9011ccULL));
    for (auto& v : p.embedding) v = rng.uniform(-0.5, 0.5);
    const double bound = 1.0 / std::sqrt(static_cast<double>(shape.context_window) *
                                         shape.embedding_dim);
    for (auto& v : p.w1) v = rng.uniform(-bound, bound);
    return p;
}

PolicyParams zeros_like(const PolicyParams& params) {
    PolicyParams g;
    g.shape = params.shape;
    const Slices s = slices(params.shape);
    g.embedding.assign(s.emb, 0.0);
    g.w1.assign(s.w1, 0.0);
    g.b1.assign(s.b1, 0.0);
    g.w2.assign(s.w2, 0.0);
    g.b2.assign(s.b2, 0.0);
    return g;
}

StateEncoding encode_state(std::string_view prefix, int context_window) {
    StateEncoding st;
    st.position = static_cast<int>(prefix.size());
    st.context.assign(static_cast<size_t>(context_window), kBosSymbol);
    const int take = std::min<int>(context_window, st.position);
    for (int k = 0; k < take; ++k) {
        const char c = prefix[prefix.size() - static_cast<size_t>(take) + static_cast<size_t>(k)];
        st.context[static_cast<size_t>(context_window - take + k)] = motifs::base_index(c);
    }
    return st;
}

namespace {

// Transient per-step activations; reused across steps to avoid allocation.
struct Workspace {
    std::vector<double> input;   // w*d concatenated embeddings
    std::vector<double> hidden;  // tanh activations
    std::array<double, 4> logit{};
    std::array<double, 4> prob{};

    void resize(const Shape& s) {
        input.resize(static_cast<size_t>(s.context_window) * s.embedding_dim);
        hidden.resize(static_cast<size_t>(s.hidden_size));
    }
};

void forward(const PolicyParams& p, const int* context, Workspace& ws) {
    const int w = p.shape.context_window, d = p.shape.embedding_dim, H = p.shape.hidden_size;
    for (int k = 0; k < w; ++k) {
        const double* emb = &p.embedding[static_cast<size_t>(context[k]) * d];
        std::copy(emb, emb + d, ws.input.begin() + static_cast<std::ptrdiff_t>(k) * d);
    }
    const int in_dim = w * d;
    for (int h = 0; h < H; ++h) ws.hidden[static_cast<size_t>(h)] = p.b1[static_cast<size_t>(h)];
    for (int i = 0; i < in_dim; ++i) {
        const double xi = ws.input[static_cast<size_t>(i)];
        if (xi == 0.0) continue;
        const double* row = &p.w1[static_cast<size_t>(i) * H];
        for (int h = 0; h < H; ++h) ws.hidden[static_cast<size_t>(h)] += xi * row[h];
    }
    for (int h = 0; h < H; ++h) ws.hidden[static_cast<size_t>(h)] = std::tanh(ws.hidden[static_cast<size_t>(h)]);
    for (int a = 0; a < kAlphabet; ++a) ws.logit[static_cast<size_t>(a)] = p.b2[static_cast<size_t>(a)];
    for (int h = 0; h < H; ++h) {
        const double hv = ws.hidden[static_cast<size_t>(h)];
        const double* row = &p.w2[static_cast<size_t>(h) * kAlphabet];
        for (int a = 0; a < kAlphabet; ++a) ws.logit[static_cast<size_t>(a)] += hv * row[a];
    }
    double mx = ws.logit[0];
    for (int a = 1; a < kAlphabet; ++a) mx = std::max(mx, ws.logit[static_cast<size_t>(a)]);
    double z = 0.0;
    for (int a = 0; a < kAlphabet; ++a) {
        ws.prob[static_cast<size_t>(a)] = std::exp(ws.logit[static_cast<size_t>(a)] - mx);
        z += ws.prob[static_cast<size_t>(a)];
    }
    for (int a = 0; a < kAlphabet; ++a) ws.prob[static_cast<size_t>(a)] /= z;
}

// Backprop one step given dL/dlogits; accumulates into grad.
void backward(const PolicyParams& p, const int* context, const Workspace& ws,
              const std::array<double, 4>& dlogit, PolicyParams& grad) {
    const int w = p.shape.context_window, d = p.shape.embedding_dim, H = p.shape.hidden_size;
    const int in_dim = w * d;

    thread_local std::vector<double> dhidden, dinput;
    dhidden.assign(static_cast<size_t>(H), 0.0);
    dinput.assign(static_cast<size_t>(in_dim), 0.0);

    for (int a = 0; a < kAlphabet; ++a) grad.b2[static_cast<size_t>(a)] += dlogit[static_cast<size_t>(a)];
    for (int h = 0; h < H; ++h) {
        const double hv = ws.hidden[static_cast<size_t>(h)];
        double* grow = &grad.w2[static_cast<size_t>(h) * kAlphabet];
        const double* row = &p.w2[static_cast<size_t>(h) * kAlphabet];
        double dh = 0.0;
        for (int a = 0; a < kAlphabet; ++a) {
            grow[a] += hv * dlogit[static_cast<size_t>(a)];
            dh += row[a] * dlogit[static_cast<size_t>(a)];
        }
        dhidden[static_cast<size_t>(h)] = dh * (1.0 - hv * hv);  // tanh'
    }
    for (int h = 0; h < H; ++h) grad.b1[static_cast<size_t>(h)] += dhidden[static_cast<size_t>(h)];
    for (int i = 0; i < in_dim; ++i) {
        const double xi = ws.input[static_cast<size_t>(i)];
        double* grow = &grad.w1[static_cast<size_t>(i) * H];
        const double* row = &p.w1[static_cast<size_t>(i) * H];
        double dx = 0.0;
        for (int h = 0; h < H; ++h) {
            const double dh = dhidden[static_cast<size_t>(h)];
            grow[h] += xi * dh;
            dx += row[h] * dh;
        }
        dinput[static_cast<size_t>(i)] = dx;
    }
    for (int k = 0; k < w; ++k) {
        double* gemb = &grad.embedding[static_cast<size_t>(context[k]) * d];
        const double* din = &dinput[static_cast<size_t>(k) * d];
        for (int j = 0; j < d; ++j) gemb[j] += din[j];
    }
}

void shift_context(std::vector<int>& context, int symbol) {
    for (size_t k = 0; k + 1 < context.size(); ++k) context[k] = context[k + 1];
    context.back() = symbol;
}

double entropy_of(const std::array<double, 4>& prob) {
    double h = 0.0;
    for (double p : prob)
        if (p > 0) h -= p * std::log(p);
    return h;
}

}  // namespace

std::array<double, 4> logits(const PolicyParams& params, const StateEncoding& state) {
    if (static_cast<int>(state.context.size()) != params.shape.context_window)
        throw std::invalid_argument("logits: state context width mismatch");
    Workspace ws;
    ws.resize(params.shape);
    forward(params, state.context.data(), ws);
    return ws.logit;
}

std::array<double, 4> softmax(const std::array<double, 4>& logits) {
    std::array<double, 4> p{};
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double z = 0.0;
    for (int a = 0; a < 4; ++a) {
        p[static_cast<size_t>(a)] = std::exp(logits[static_cast<size_t>(a)] - mx);
        z += p[static_cast<size_t>(a)];
    }
    for (auto& v : p) v /= z;
    return p;
}

SampleResult sample_sequence(const PolicyParams& params, int length, Rng& rng) {
    if (length < 1) throw std::invalid_argument("sample_sequence: length must be >= 1");
    SampleResult out;
    out.sequence.reserve(static_cast<size_t>(length));
    out.step_logprobs.reserve(static_cast<size_t>(length));
    out.step_entropies.reserve(static_cast<size_t>(length));

    Workspace ws;
    ws.resize(params.shape);
    std::vector<int> context(static_cast<size_t>(params.shape.context_window), kBosSymbol);
    for (int i = 0; i < length; ++i) {
        forward(params, context.data(), ws);
        const double u = rng.next_unit();
        double acc = 0.0;
        int action = kAlphabet - 1;
        for (int a = 0; a < kAlphabet; ++a) {
            acc += ws.prob[static_cast<size_t>(a)];
            if (u < acc) {
                action = a;
                break;
            }
        }
        out.sequence.push_back(motifs::kBases[action]);
        out.step_logprobs.push_back(std::log(ws.prob[static_cast<size_t>(action)]));
        out.step_entropies.push_back(entropy_of(ws.prob));
        shift_context(context, action);
    }
    return out;
}

void accumulate_weighted_episode(const PolicyParams& params, std::string_view sequence,
                                 double w_logp, double w_ent, double& loss, PolicyParams& grad) {
    thread_local Workspace ws;
    ws.resize(params.shape);
    std::vector<int> context(static_cast<size_t>(params.shape.context_window), kBosSymbol);
    std::array<double, 4> dlogit{};
    for (char c : sequence) {
        const int action = motifs::base_index(c);
        forward(params, context.data(), ws);
        const double logp = std::log(ws.prob[static_cast<size_t>(action)]);
        const double H = entropy_of(ws.prob);
        loss += w_logp * logp + w_ent * H;

        for (int a = 0; a < kAlphabet; ++a) {
            const double pa = ws.prob[static_cast<size_t>(a)];
            const double dlogp = (a == action ? 1.0 : 0.0) - pa;                // d logpi / dz
            const double dent = pa > 0 ? -pa * (std::log(pa) + H) : 0.0;        // d H / dz
            dlogit[static_cast<size_t>(a)] = w_logp * dlogp + w_ent * dent;
        }
        backward(params, context.data(), ws, dlogit, grad);
        shift_context(context, action);
    }
}

void episode_scores(const PolicyParams& params, std::string_view sequence, double& sum_logprob,
                    double& sum_entropy) {
    Workspace ws;
    ws.resize(params.shape);
    std::vector<int> context(static_cast<size_t>(params.shape.context_window), kBosSymbol);
    sum_logprob = 0.0;
    sum_entropy = 0.0;
    for (char c : sequence) {
        const int action = motifs::base_index(c);
        forward(params, context.data(), ws);
        sum_logprob += std::log(ws.prob[static_cast<size_t>(action)]);
        sum_entropy += entropy_of(ws.prob);
        shift_context(context, action);
    }
}

LossAndGrad nll_and_grad(const PolicyParams& params, const std::vector<std::string>& batch) {
    if (batch.empty()) throw std::invalid_argument("nll_and_grad: empty batch");
    LossAndGrad out;
    out.grad = zeros_like(params);
    const double w = -1.0 / static_cast<double>(batch.size());
    for (const auto& seq : batch)
        accumulate_weighted_episode(params, seq, w, 0.0, out.loss, out.grad);
    return out;
}

void clip_gradient(PolicyParams& grad, double clip_norm) {
    if (clip_norm <= 0) return;
    const double norm = std::sqrt(grad.squared_norm());
    if (norm > clip_norm) grad.scale(clip_norm / norm);
}

PretrainResult pretrain(const PolicyParams& params, const std::vector<std::string>& sequences,
                        const PretrainConfig& config) {
    if (sequences.empty()) throw std::invalid_argument("pretrain: empty dataset");
    PretrainResult result;
    result.params = params;
    Rng rng(mix_seed(config.seed, 0x9e7ea1ULL));

    std::vector<size_t> order(sequences.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        size_t seen = 0;
        for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch_size)) {
            const size_t stop = std::min(order.size(), start + static_cast<size_t>(config.batch_size));
            std::vector<std::string> batch;
            batch.reserve(stop - start);
            for (size_t i = start; i < stop; ++i) batch.push_back(sequences[order[i]]);
            LossAndGrad lg = nll_and_grad(result.params, batch);
            if (!std::isfinite(lg.loss))
                throw std::runtime_error("pretrain: non-finite loss at epoch " +
                                         std::to_string(epoch) + " (lr too large?)");
            clip_gradient(lg.grad, config.clip_norm);
            result.params.axpy(-config.lr, lg.grad);
            epoch_loss += lg.loss * static_cast<double>(batch.size());
            seen += batch.size();
        }
        result.epoch_losses.push_back(epoch_loss / static_cast<double>(seen));
    }
    return result;
}

nlohmann::json params_to_json(const PolicyParams& p) {
    nlohmann::json j;
    j["format"] = "credo.policy";
    j["version"] = 1;
    j["context_window"] = p.shape.context_window;
    j["embedding_dim"] = p.shape.embedding_dim;
    j["hidden_size"] = p.shape.hidden_size;
    j["embedding"] = p.embedding;
    j["w1"] = p.w1;
    j["b1"] = p.b1;
    j["w2"] = p.w2;
    j["b2"] = p.b2;
    return j;
}

PolicyParams params_from_json(const nlohmann::json& j) {
    if (j.at("format").get<std::string>() != "credo.policy")
        throw std::runtime_error("policy JSON: unexpected format tag");
    if (j.at("version").get<int>() != 1)
        throw std::runtime_error("policy JSON: unsupported version");
    PolicyParams p;
    p.shape.context_window = j.at("context_window").get<int>();
    p.shape.embedding_dim = j.at("embedding_dim").get<int>();
    p.shape.hidden_size = j.at("hidden_size").get<int>();
    p.embedding = j.at("embedding").get<std::vector<double>>();
    p.w1 = j.at("w1").get<std::vector<double>>();
    p.b1 = j.at("b1").get<std::vector<double>>();
    p.w2 = j.at("w2").get<std::vector<double>>();
    p.b2 = j.at("b2").get<std::vector<double>>();
    const PolicyParams ref = zeros_like(p);
    if (p.embedding.size() != ref.embedding.size() || p.w1.size() != ref.w1.size() ||
        p.b1.size() != ref.b1.size() || p.w2.size() != ref.w2.size() || p.b2.size() != ref.b2.size())
        throw std::runtime_error("policy JSON: parameter shapes inconsistent with metadata");
    return p;
}

}  // namespace credo::policy
