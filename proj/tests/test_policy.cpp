#include <doctest.h>

#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "credo/policy.hpp"
#include "helpers.hpp"

using namespace credo;
using namespace credo::policy;

namespace {

const Shape kSmall{3, 4, 8};  // keeps finite-difference sweeps cheap

PolicyParams random_params(const Shape& shape, uint64_t seed) {
    PolicyParams p = init_params(shape, seed);
    Rng rng(mix_seed(seed, 17));
    for (size_t i = 0; i < p.param_count(); ++i) *p.flat(i) = rng.uniform(-0.4, 0.4);
    return p;
}

}  // namespace

TEST_CASE("zero output layer gives uniform probabilities") {
    const auto p = init_params({8, 16, 64}, 1);
    const auto st = encode_state("", 8);
    const auto probs = softmax(logits(p, st));
    for (double v : probs) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("state encoding pads with BOS on the left") {
    const auto st = encode_state("", 4);
    CHECK(st.context == std::vector<int>{kBosSymbol, kBosSymbol, kBosSymbol, kBosSymbol});
    CHECK(st.position == 0);
    const auto st2 = encode_state("AC", 4);
    CHECK(st2.context == std::vector<int>{kBosSymbol, kBosSymbol, 0, 1});
    const auto st3 = encode_state("ACGTAC", 4);
    CHECK(st3.context == std::vector<int>{2, 3, 0, 1});
    CHECK(st3.position == 6);
}

TEST_CASE("probabilities sum to one and logits are pure") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = random_params(kSmall, 100 + static_cast<uint64_t>(trial));
        const auto st = encode_state(testutil::random_sequence(rng, 6), kSmall.context_window);
        const auto l1 = logits(p, st);
        const auto l2 = logits(p, st);
        CHECK(l1 == l2);
        const auto probs = softmax(l1);
        double s = 0;
        for (double v : probs) s += v;
        CHECK(std::abs(s - 1.0) < 1e-12);
    }
}

TEST_CASE("near-deterministic policy emits a constant sequence") {
    auto p = init_params(kSmall, 3);
    p.b2[2] = 1e6;  // force G
    Rng rng(1);
    const auto out = sample_sequence(p, 12, rng);
    CHECK(out.sequence == std::string(12, 'G'));
    for (double lp : out.step_logprobs) CHECK(std::abs(lp) < 1e-9);
}

TEST_CASE("uniform policy logprobs and entropies") {
    const auto p = init_params(kSmall, 4);
    Rng rng(2);
    const auto out = sample_sequence(p, 10, rng);
    for (double lp : out.step_logprobs) CHECK(lp == doctest::Approx(std::log(0.25)).epsilon(1e-12));
    for (double h : out.step_entropies) CHECK(h == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("entropy stays within [0, ln 4]") {
    for (int trial = 0; trial < 10; ++trial) {
        const auto p = random_params(kSmall, 300 + static_cast<uint64_t>(trial));
        Rng sampler(mix_seed(7, static_cast<uint64_t>(trial)));
        const auto out = sample_sequence(p, 20, sampler);
        for (double h : out.step_entropies) {
            CHECK(h >= 0.0);
            CHECK(h <= std::log(4.0) + 1e-12);
        }
    }
}

TEST_CASE("stored per-step logprobs equal recomputed sequence scores") {
    const auto p = random_params(kSmall, 88);
    Rng sampler(44);
    const auto out = sample_sequence(p, 25, sampler);
    double stored = 0;
    for (double lp : out.step_logprobs) stored += lp;
    double recomputed = 0, entropy = 0;
    episode_scores(p, out.sequence, recomputed, entropy);
    CHECK(recomputed == doctest::Approx(stored).epsilon(1e-10));
}

TEST_CASE("sampling is bit-reproducible under a fixed rng") {
    const auto p = random_params(kSmall, 21);
    Rng a(9), b(9);
    const auto r1 = sample_sequence(p, 30, a);
    const auto r2 = sample_sequence(p, 30, b);
    CHECK(r1.sequence == r2.sequence);
    CHECK(r1.step_logprobs == r2.step_logprobs);
}

TEST_CASE("empirical base frequencies match softmax probabilities") {
    // context-independent skewed policy: zero hidden path, biased output
    auto p = init_params({2, 2, 4}, 11);
    p.set_zero();
    p.b2 = {0.9, -0.3, 0.1, -0.7};
    const auto probs = softmax({0.9, -0.3, 0.1, -0.7});

    Rng rng(123);
    std::map<char, long> counts{{'A', 0}, {'C', 0}, {'G', 0}, {'T', 0}};
    const int n_seqs = 10000, L = 10;
    for (int i = 0; i < n_seqs; ++i) {
        const auto out = sample_sequence(p, L, rng);
        for (char c : out.sequence) counts[c]++;
    }
    const double total = static_cast<double>(n_seqs) * L;
    const char* bases = "ACGT";
    for (int b = 0; b < 4; ++b) {
        const double expect = probs[static_cast<size_t>(b)];
        const double sigma = std::sqrt(expect * (1 - expect) / total);
        const double freq = counts[bases[b]] / total;
        CHECK(std::abs(freq - expect) < 3 * sigma + 1e-9);
    }
}

TEST_CASE("nll gradient matches central finite differences") {
    Rng rng(77);
    double worst = 0;
    for (int draw = 0; draw < 20; ++draw) {
        const auto p = random_params(kSmall, 500 + static_cast<uint64_t>(draw));
        std::vector<std::string> batch;
        for (int i = 0; i < 2; ++i) batch.push_back(testutil::random_sequence(rng, 8));
        const auto lg = nll_and_grad(p, batch);
        const double err = testutil::max_grad_rel_error(
            p, lg.grad, [&](const PolicyParams& q) { return nll_and_grad(q, batch).loss; });
        worst = std::max(worst, err);
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("uniform policy batch loss is L ln 4") {
    const auto p = init_params(kSmall, 12);
    std::vector<std::string> batch{"ACGTACGTAC", "TTTTTTTTTT"};
    const auto lg = nll_and_grad(p, batch);
    CHECK(lg.loss == doctest::Approx(10 * std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("duplicating the batch leaves the mean loss unchanged") {
    const auto p = random_params(kSmall, 13);
    std::vector<std::string> batch{"ACGTAC", "GGTTAA"};
    std::vector<std::string> doubled = batch;
    doubled.insert(doubled.end(), batch.begin(), batch.end());
    CHECK(nll_and_grad(p, batch).loss ==
          doctest::Approx(nll_and_grad(p, doubled).loss).epsilon(1e-12));
}

TEST_CASE("pretrain memorizes a repeated sequence") {
    const std::string target = "ACGGTTACGCAATGCTAGGA";
    std::vector<std::string> data(16, target);
    PretrainConfig cfg;
    cfg.epochs = 300;
    cfg.lr = 0.25;
    cfg.batch_size = 16;
    const auto result = pretrain(init_params({6, 8, 32}, 2), data, cfg);
    const auto lg = nll_and_grad(result.params, {target});
    const double per_position = lg.loss / static_cast<double>(target.size());
    CHECK(per_position < 0.05);
    CHECK(result.epoch_losses.back() < result.epoch_losses.front());
}

TEST_CASE("pretrain with zero lr leaves parameters bitwise unchanged") {
    const auto p = random_params(kSmall, 14);
    PretrainConfig cfg;
    cfg.epochs = 3;
    cfg.lr = 0.0;
    const auto result = pretrain(p, {"ACGTACGT", "TTGGAACC"}, cfg);
    CHECK(result.params == p);
}

TEST_CASE("pretraining on a motif corpus lifts the planted 8-mer frequency") {
    const std::string consensus = "ACGTTGCA";
    int trained_hits = 0;
    const int n_gen = 400, gen_len = 30;
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        // corpus: random 30-mers with the consensus planted once each
        Rng rng(mix_seed(1000, seed));
        std::vector<std::string> corpus;
        for (int i = 0; i < 150; ++i) {
            std::string s = testutil::random_sequence(rng, gen_len);
            const auto pos = rng.next_below(gen_len - 8 + 1);
            s.replace(pos, 8, consensus);
            corpus.push_back(s);
        }
        PretrainConfig cfg;
        cfg.epochs = 30;
        cfg.lr = 0.15;
        cfg.batch_size = 32;
        cfg.seed = seed;
        const auto result = pretrain(init_params({8, 8, 32}, seed), corpus, cfg);

        Rng sampler(mix_seed(2000, seed));
        for (int i = 0; i < n_gen; ++i) {
            const auto out = sample_sequence(result.params, gen_len, sampler);
            for (size_t pos = 0; pos + 8 <= out.sequence.size(); ++pos)
                if (out.sequence.compare(pos, 8, consensus) == 0) ++trained_hits;
        }
    }
    // uniform policy expectation: (L-7) * 4^-8 occurrences per sequence
    const double uniform_expect = 5.0 * n_gen * (gen_len - 7) * std::pow(0.25, 8);
    CHECK(static_cast<double>(trained_hits) >= 2.0 * uniform_expect);
}

TEST_CASE("pretrain aborts on divergence") {
    PretrainConfig cfg;
    cfg.epochs = 50;
    cfg.lr = 1e9;
    cfg.clip_norm = 0.0;  // clipping off
    CHECK_THROWS_AS(pretrain(random_params(kSmall, 3), {"ACGTACGTACGTACGT"}, cfg),
                    std::runtime_error);
}

TEST_CASE("checkpoint json round trip is exact") {
    const auto p = random_params({4, 6, 12}, 19);
    const auto restored = params_from_json(params_to_json(p));
    CHECK(restored == p);
    auto j = params_to_json(p);
    j["w1"] = std::vector<double>{1.0};
    CHECK_THROWS_AS(params_from_json(j), std::runtime_error);
}
