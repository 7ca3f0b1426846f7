#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "credo/optimizer.hpp"
#include "helpers.hpp"

using namespace credo;
using namespace credo::optimizer;

namespace {

attribution::RoleTable make_table(const std::vector<std::pair<std::string, double>>& rewards) {
    attribution::RoleTable t;
    for (const auto& [id, r] : rewards) {
        attribution::RoleEntry e;
        e.motif_id = id;
        e.reward = r;
        e.mean_shap = r == 0 ? 0.0 : r / 0.01;
        e.p_value = r == 0 ? 1.0 : 0.001;
        e.role = r > 0   ? attribution::Role::activator
                 : r < 0 ? attribution::Role::repressor
                         : attribution::Role::neutral;
        t.entries.push_back(e);
    }
    return t;
}

motifs::Vocabulary small_vocab() {
    return {testutil::consensus_pfm("M1", "ACGTTGCA"), testutil::consensus_pfm("M2", "GGATCCGT")};
}

const landscape::Normalization kUnitBounds{0.0, 1.0};

GuideFn zero_guide() {
    return [](const std::string&) { return 0.5; };
}

}  // namespace

TEST_CASE("episode trace total return sums shaping and terminal fitness") {
    EpisodeTrace tr;
    tr.step_rewards = {0.0, 0.004, 0.0, -0.002};
    tr.terminal_fitness = 0.7;
    CHECK(tr.total_return() == doctest::Approx(0.702));
}

TEST_CASE("rollout with an all-zero role table only pays terminal fitness") {
    const auto vocab = small_vocab();
    const auto table = make_table({{"M1", 0.0}, {"M2", 0.0}});
    const RewardMap rewards(table);
    CHECK(rewards.all_zero());

    const auto params = policy::init_params({4, 4, 8}, 1);
    const auto traces =
        rollout_batch(params, rewards, zero_guide(), 8, vocab, {}, 30, kUnitBounds, 99);
    REQUIRE(traces.size() == 8);
    for (const auto& tr : traces) {
        CHECK(tr.sequence.size() == 30);
        for (double r : tr.step_rewards) CHECK(r == 0.0);
        CHECK(tr.terminal_fitness == doctest::Approx(0.5));
        CHECK(tr.total_return() == doctest::Approx(0.5));
    }
}

TEST_CASE("a single activator hit pays its reward at the completing step") {
    // policy framework aside, verify the trace contract directly on a
    // constructed sequence: consensus M1 ends at position 17
    const auto vocab = small_vocab();
    const auto table = make_table({{"M1", 0.004}, {"M2", 0.0}});
    const RewardMap rewards(table);

    const std::string seq = "TTTTTTTTT" + vocab[0].consensus() + "TTTTTTTTTTTTT";  // ends at 17
    EpisodeTrace tr;
    tr.sequence = seq;
    tr.step_rewards.assign(seq.size(), 0.0);
    for (size_t i = 1; i <= seq.size(); ++i) {
        for (const auto& h :
             motifs::incremental_hits(std::string_view(seq).substr(0, i), vocab, {}))
            tr.step_rewards[i - 1] += rewards.reward(h.motif_id);
    }
    CHECK(tr.step_rewards[16] == doctest::Approx(0.004));
    for (size_t i = 0; i < tr.step_rewards.size(); ++i)
        if (i != 16) CHECK(tr.step_rewards[i] == 0.0);
}

TEST_CASE("rollout step rewards re-derive from a full scan of the final sequence") {
    const auto vocab = small_vocab();
    const auto table = make_table({{"M1", 0.004}, {"M2", -0.002}});
    const RewardMap rewards(table);
    const auto params = policy::init_params({4, 4, 8}, 7);

    const auto traces =
        rollout_batch(params, rewards, zero_guide(), 32, vocab, {}, 40, kUnitBounds, 2024);
    for (const auto& tr : traces) {
        std::vector<double> rederived(tr.sequence.size(), 0.0);
        for (const auto& h : motifs::scan(tr.sequence, vocab, {}))
            rederived[static_cast<size_t>(h.end_position - 1)] += rewards.reward(h.motif_id);
        REQUIRE(rederived.size() == tr.step_rewards.size());
        for (size_t i = 0; i < rederived.size(); ++i)
            CHECK(rederived[i] == doctest::Approx(tr.step_rewards[i]).epsilon(1e-12));
        // non-terminal steps with no completed hit carry exactly 0
        std::map<int, bool> has_hit;
        for (const auto& h : tr.hits) has_hit[h.end_position] = true;
        for (size_t i = 0; i + 1 < tr.step_rewards.size(); ++i)
            if (!has_hit[static_cast<int>(i + 1)]) CHECK(tr.step_rewards[i] == 0.0);
    }
}

TEST_CASE("rollout normalizes and clamps guide scores through the dataset bounds") {
    const auto vocab = small_vocab();
    const RewardMap rewards(make_table({{"M1", 0.0}, {"M2", 0.0}}));
    const auto params = policy::init_params({4, 4, 8}, 3);
    landscape::Normalization bounds{-2.0, 6.0};
    const GuideFn guide = [](const std::string&) { return 2.0; };
    auto traces = rollout_batch(params, rewards, guide, 4, vocab, {}, 20, bounds, 5);
    for (const auto& tr : traces) CHECK(tr.terminal_fitness == doctest::Approx(0.5));

    const GuideFn high = [](const std::string&) { return 100.0; };
    traces = rollout_batch(params, rewards, high, 4, vocab, {}, 20, bounds, 5);
    for (const auto& tr : traces) CHECK(tr.terminal_fitness == 1.0);

    const GuideFn failing = [](const std::string&) -> double {
        throw std::runtime_error("surrogate exploded");
    };
    CHECK_THROWS_WITH_AS(rollout_batch(params, rewards, failing, 4, vocab, {}, 20, bounds, 5),
                         doctest::Contains("episode"), std::runtime_error);
}

TEST_CASE("rollout episodes are independent of batch evaluation order") {
    const auto vocab = small_vocab();
    const RewardMap rewards(make_table({{"M1", 0.004}, {"M2", 0.0}}));
    const auto params = policy::init_params({4, 4, 8}, 5);
    const auto all = rollout_batch(params, rewards, zero_guide(), 16, vocab, {}, 25, kUnitBounds, 42);
    const auto few = rollout_batch(params, rewards, zero_guide(), 4, vocab, {}, 25, kUnitBounds, 42);
    for (int k = 0; k < 4; ++k)
        CHECK(all[static_cast<size_t>(k)].sequence == few[static_cast<size_t>(k)].sequence);
}

TEST_CASE("equal returns with no entropy bonus and empty buffer leave parameters unchanged") {
    const auto vocab = small_vocab();
    const RewardMap rewards(make_table({{"M1", 0.0}, {"M2", 0.0}}));
    auto params = policy::init_params({4, 4, 8}, 11);
    const auto before = params;

    RunConfig cfg;
    cfg.K = 16;
    cfg.entropy_coef = 0.0;
    cfg.replay_fraction = 0.0;
    cfg.sequence_length = 20;
    auto traces = rollout_batch(params, rewards, zero_guide(), 16, vocab, {}, 20, kUnitBounds, 7);
    ReplayBuffer replay(8);
    BaselineState baseline;
    Rng rng(1);
    reinforce_update(params, traces, replay, cfg, baseline, rng);
    CHECK(params == before);  // advantage is zero for every episode
}

TEST_CASE("single-episode gradient equals G times the sequence log-likelihood gradient") {
    auto params = policy::init_params({3, 4, 8}, 21);
    Rng rng(2);
    for (size_t i = 0; i < params.param_count(); ++i) *params.flat(i) = rng.uniform(-0.3, 0.3);

    EpisodeTrace tr;
    tr.sequence = "ACGTTGCAAC";
    tr.step_rewards.assign(tr.sequence.size(), 0.0);
    tr.terminal_fitness = 0.8;  // G = 0.8

    RunConfig cfg;
    cfg.entropy_coef = 0.0;
    cfg.replay_fraction = 0.0;
    const auto lg = reinforce_loss_and_grad(params, {tr}, {}, 0.0, cfg);
    const auto nll = policy::nll_and_grad(params, {tr.sequence});
    CHECK(lg.loss == doctest::Approx(0.8 * nll.loss).epsilon(1e-12));
    for (size_t i = 0; i < params.param_count(); ++i)
        CHECK(*lg.grad.flat(i) == doctest::Approx(0.8 * *nll.grad.flat(i)).epsilon(1e-9));
}

TEST_CASE("replay and entropy toggles off reduce to vanilla baseline-subtracted REINFORCE") {
    auto params = policy::init_params({3, 4, 8}, 51);
    Rng rng(52);
    for (size_t i = 0; i < params.param_count(); ++i) *params.flat(i) = rng.uniform(-0.3, 0.3);

    std::vector<EpisodeTrace> traces(4);
    for (auto& tr : traces) {
        tr.sequence = testutil::random_sequence(rng, 10);
        tr.step_rewards.assign(10, 0.0);
        tr.terminal_fitness = rng.uniform(0, 1);
    }
    const double baseline = 0.42;
    RunConfig cfg;
    cfg.entropy_coef = 0.0;
    cfg.replay_fraction = 0.0;
    const auto lg = reinforce_loss_and_grad(params, traces, {}, baseline, cfg);

    double expected = 0.0;
    for (const auto& tr : traces) {
        double logp = 0, ent = 0;
        policy::episode_scores(params, tr.sequence, logp, ent);
        expected += -(tr.total_return() - baseline) * logp / static_cast<double>(traces.size());
    }
    CHECK(lg.loss == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("full reinforce loss gradient matches finite differences") {
    const policy::Shape shape{3, 4, 8};
    Rng rng(31);
    double worst = 0;
    for (int draw = 0; draw < 20; ++draw) {
        auto params = policy::init_params(shape, 100 + static_cast<uint64_t>(draw));
        for (size_t i = 0; i < params.param_count(); ++i) *params.flat(i) = rng.uniform(-0.3, 0.3);

        std::vector<EpisodeTrace> traces(3);
        for (auto& tr : traces) {
            tr.sequence = testutil::random_sequence(rng, 8);
            tr.step_rewards.assign(8, 0.0);
            tr.step_rewards[3] = rng.uniform(-0.01, 0.01);
            tr.terminal_fitness = rng.uniform(0, 1);
        }
        std::vector<std::string> replay_seqs{testutil::random_sequence(rng, 8),
                                             testutil::random_sequence(rng, 8)};
        RunConfig cfg;
        cfg.entropy_coef = 0.013;
        cfg.replay_fraction = 0.4;
        const double baseline = 0.37;

        const auto lg = reinforce_loss_and_grad(params, traces, replay_seqs, baseline, cfg);
        const double err = testutil::max_grad_rel_error(
            params, lg.grad, [&](const policy::PolicyParams& q) {
                return reinforce_loss_and_grad(q, traces, replay_seqs, baseline, cfg).loss;
            });
        worst = std::max(worst, err);
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("replay buffer keeps the best unique sequences") {
    ReplayBuffer buf(3);
    buf.insert("AAAA", 0.5);
    buf.insert("CCCC", 0.9);
    buf.insert("GGGG", 0.7);
    CHECK(buf.size() == 3);
    CHECK(buf.min_fitness() == 0.5);
    CHECK(buf.max_fitness() == 0.9);

    // lower than the buffer minimum when full: unchanged
    buf.insert("TTTT", 0.4);
    CHECK(buf.size() == 3);
    CHECK(buf.min_fitness() == 0.5);
    CHECK(buf.entries()[2].first == "AAAA");

    // duplicate with higher fitness: updated in place, size unchanged
    buf.insert("AAAA", 0.95);
    CHECK(buf.size() == 3);
    CHECK(buf.max_fitness() == 0.95);
    CHECK(buf.entries()[0].first == "AAAA");

    // duplicate with lower fitness: ignored
    buf.insert("AAAA", 0.1);
    CHECK(buf.max_fitness() == 0.95);

    // better entry evicts the worst
    buf.insert("TTTT", 0.8);
    CHECK(buf.size() == 3);
    CHECK(buf.min_fitness() == 0.8);
}

TEST_CASE("replay buffer contents equal a brute-force sort of the stream") {
    Rng rng(41);
    ReplayBuffer buf(16);
    std::map<std::string, double> best_by_seq;
    for (int i = 0; i < 400; ++i) {
        const std::string seq = testutil::random_sequence(rng, 6);
        const double fit = rng.uniform(0, 1);
        buf.insert(seq, fit);
        auto it = best_by_seq.find(seq);
        if (it == best_by_seq.end() || fit > it->second) best_by_seq[seq] = fit;
    }
    std::vector<std::pair<std::string, double>> expected(best_by_seq.begin(), best_by_seq.end());
    std::sort(expected.begin(), expected.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    expected.resize(16);
    CHECK(buf.entries() == expected);
}

TEST_CASE("replay buffer minimum never decreases once full") {
    Rng rng(43);
    ReplayBuffer buf(8);
    double last_min = -1;
    bool was_full = false;
    for (int i = 0; i < 300; ++i) {
        buf.insert(testutil::random_sequence(rng, 5), rng.uniform(0, 1));
        if (was_full) CHECK(buf.min_fitness() >= last_min);
        if (buf.size() == buf.capacity()) {
            was_full = true;
            last_min = buf.min_fitness();
        }
    }
    CHECK(was_full);
}

TEST_CASE("sample_top_half draws only from the better half") {
    ReplayBuffer buf(8);
    buf.insert("AAAA", 0.9);
    buf.insert("CCCC", 0.8);
    buf.insert("GGGG", 0.2);
    buf.insert("TTTT", 0.1);
    Rng rng(3);
    const auto picks = buf.sample_top_half(50, rng);
    REQUIRE(picks.size() == 50);
    for (const auto& p : picks) CHECK((p == "AAAA" || p == "CCCC"));
}

TEST_CASE("run_optimization smoke: one round produces one log row and K proposals") {
    const auto vocab = small_vocab();
    const auto table = make_table({{"M1", 0.004}, {"M2", -0.002}});
    const auto params = policy::init_params({4, 4, 8}, 2);

    RunConfig cfg;
    cfg.K = 16;
    cfg.E = 1;
    cfg.sequence_length = 20;
    cfg.top_k = 4;
    cfg.best_m = 8;

    RunInputs inputs;
    inputs.pretrained = &params;
    inputs.role_table = &table;
    inputs.vocab = &vocab;
    inputs.bounds = kUnitBounds;
    inputs.guide = zero_guide();
    inputs.oracle = inputs.guide;

    const auto log = run_optimization(cfg, inputs);
    CHECK(log.rows.size() == 1);
    CHECK(log.rows[0].round == 1);
    CHECK(log.final_proposals.size() == 16);
}

TEST_CASE("run_optimization is bitwise deterministic for a fixed seed") {
    const auto vocab = small_vocab();
    const auto table = make_table({{"M1", 0.004}, {"M2", -0.002}});
    const auto params = policy::init_params({4, 4, 8}, 2);
    const GuideFn guide = [&](const std::string& seq) {
        return static_cast<double>(std::count(seq.begin(), seq.end(), 'A')) / seq.size();
    };

    RunConfig cfg;
    cfg.K = 16;
    cfg.E = 4;
    cfg.sequence_length = 20;
    cfg.top_k = 4;
    cfg.best_m = 8;

    RunInputs inputs;
    inputs.pretrained = &params;
    inputs.role_table = &table;
    inputs.vocab = &vocab;
    inputs.bounds = kUnitBounds;
    inputs.guide = guide;
    inputs.oracle = guide;

    const auto a = run_optimization(cfg, inputs);
    const auto b = run_optimization(cfg, inputs);
    CHECK(run_log_to_csv(a) == run_log_to_csv(b));
    REQUIRE(a.final_proposals.size() == b.final_proposals.size());
    for (size_t i = 0; i < a.final_proposals.size(); ++i)
        CHECK(a.final_proposals[i].sequence == b.final_proposals[i].sequence);
}

TEST_CASE("alpha zero degrades to fitness-only REINFORCE") {
    const auto vocab = small_vocab();
    // zeroed rewards correspond to the alpha = 0 toggle
    const auto table = make_table({{"M1", 0.0}, {"M2", 0.0}});
    const RewardMap rewards(table);
    const auto params = policy::init_params({4, 4, 8}, 9);
    const auto traces =
        rollout_batch(params, rewards, zero_guide(), 16, vocab, {}, 30, kUnitBounds, 31);
    for (const auto& tr : traces)
        for (double r : tr.step_rewards) CHECK(r == 0.0);
}

TEST_CASE("greedy baseline with zero mutation rate freezes after selection") {
    std::vector<std::string> seeds;
    Rng rng(5);
    for (int i = 0; i < 40; ++i) seeds.push_back(testutil::random_sequence(rng, 12));
    const GuideFn guide = [](const std::string& seq) {
        return static_cast<double>(std::count(seq.begin(), seq.end(), 'A'));
    };
    GreedyConfig cfg;
    cfg.K = 20;
    cfg.E = 5;
    cfg.mutation_rate_scale = 0.0;
    cfg.top_k = 4;
    cfg.best_m = 8;
    const landscape::Normalization bounds{0.0, 12.0};
    const auto log = greedy_baseline(cfg, guide, seeds, bounds);
    REQUIRE(log.rows.size() == 5);
    for (size_t r = 1; r < log.rows.size(); ++r) {
        CHECK(log.rows[r].metrics.top == log.rows[1].metrics.top);
        CHECK(log.rows[r].buffer_max == log.rows[1].buffer_max);
    }
}

TEST_CASE("greedy baseline max score never decreases under an A-count guide") {
    std::vector<std::string> seeds;
    Rng rng(6);
    for (int i = 0; i < 30; ++i) seeds.push_back(testutil::random_sequence(rng, 15));
    const GuideFn guide = [](const std::string& seq) {
        return static_cast<double>(std::count(seq.begin(), seq.end(), 'A'));
    };
    GreedyConfig cfg;
    cfg.K = 20;
    cfg.E = 15;
    cfg.top_k = 4;
    cfg.best_m = 8;
    const landscape::Normalization bounds{0.0, 15.0};
    const auto log = greedy_baseline(cfg, guide, seeds, bounds);
    for (size_t r = 1; r < log.rows.size(); ++r)
        CHECK(log.rows[r].buffer_max >= log.rows[r - 1].buffer_max);
    // selection pressure should push the pool toward all-A sequences
    CHECK(log.rows.back().buffer_max >= log.rows.front().buffer_max);
}

TEST_CASE("run log csv round trip") {
    RunLog log;
    RoundRow r;
    r.round = 1;
    r.metrics = {0.5, 0.4, 12.0, 0.8};
    r.mean_return = 0.45;
    r.mean_entropy = 1.2;
    r.buffer_min = 0.1;
    r.buffer_max = 0.9;
    r.oracle_top = 0.5;
    log.rows.push_back(r);
    r.round = 2;
    log.rows.push_back(r);

    const auto restored = run_log_from_csv(run_log_to_csv(log));
    REQUIRE(restored.rows.size() == 2);
    CHECK(restored.rows[0].metrics.top == doctest::Approx(0.5));
    CHECK(restored.rows[1].round == 2);
    CHECK_THROWS_AS(run_log_from_csv("x,y\n1,2\n"), std::runtime_error);
}

TEST_CASE("proposals csv includes oracle scores only in offline mode") {
    std::vector<Proposal> with{{"ACGT", 0.5, 0.4}, {"TTTT", 0.6, 0.55}};
    const auto csv = proposals_to_csv(with);
    CHECK(csv.find("sequence,guide_score,oracle_score") == 0);
    CHECK(csv.find("ACGT,0.5,0.4") != std::string::npos);

    std::vector<Proposal> without{{"ACGT", 0.5, std::nullopt}};
    CHECK(proposals_to_csv(without).find("sequence,guide_score\n") == 0);
}

TEST_CASE("run config validation") {
    RunConfig cfg;
    cfg.K = 8;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.K = 16;
    cfg.E = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.E = 1;
    cfg.replay_fraction = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
