#include "credo/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "credo/io.hpp"

namespace credo::optimizer {

double EpisodeTrace::total_return() const {
    double g = terminal_fitness;
    for (double r : step_rewards) g += r;
    return g;
}

namespace {

bool replay_order(const std::pair<std::string, double>& a,
                  const std::pair<std::string, double>& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
}

}  // namespace

void ReplayBuffer::insert(const std::string& sequence, double fitness) {
    for (auto it = entries_.begin(); it != entries_.end(); ++it) {
        if (it->first == sequence) {
            if (fitness <= it->second) return;
            entries_.erase(it);
            break;
        }
    }
    if (entries_.size() == capacity_ && !replay_order({sequence, fitness}, entries_.back()))
        return;
    const auto pos = std::lower_bound(entries_.begin(), entries_.end(),
                                      std::make_pair(sequence, fitness), replay_order);
    entries_.insert(pos, {sequence, fitness});
    if (entries_.size() > capacity_) entries_.resize(capacity_);
}

double ReplayBuffer::min_fitness() const {
    if (entries_.empty()) throw std::runtime_error("replay buffer empty");
    return entries_.back().second;
}

double ReplayBuffer::max_fitness() const {
    if (entries_.empty()) throw std::runtime_error("replay buffer empty");
    return entries_.front().second;
}

std::vector<std::string> ReplayBuffer::sample_top_half(size_t count, Rng& rng) const {
    if (entries_.empty()) return {};
    const size_t half = (entries_.size() + 1) / 2;
    std::vector<std::string> out;
    out.reserve(count);
    for (size_t i = 0; i < count; ++i)
        out.push_back(entries_[rng.next_below(static_cast<uint32_t>(half))].first);
    return out;
}

void RunConfig::validate() const {
    if (K < 16) throw std::invalid_argument("run config: K must be >= 16");
    if (E < 1) throw std::invalid_argument("run config: E must be >= 1");
    if (replay_fraction < 0 || replay_fraction > 1)
        throw std::invalid_argument("run config: replay_fraction must be in [0,1]");
    if (sequence_length < 1) throw std::invalid_argument("run config: sequence_length must be >= 1");
}

RewardMap::RewardMap(const attribution::RoleTable& table) {
    for (const auto& e : table.entries) rewards_[e.motif_id] = e.reward;
}

double RewardMap::reward(const std::string& motif_id) const {
    const auto it = rewards_.find(motif_id);
    if (it == rewards_.end())
        throw std::invalid_argument("role table has no entry for motif " + motif_id);
    return it->second;
}

bool RewardMap::all_zero() const {
    for (const auto& [id, r] : rewards_)
        if (r != 0.0) return false;
    return true;
}

double normalize_fitness(double raw, const landscape::Normalization& bounds) {
    if (bounds.max <= bounds.min) throw std::invalid_argument("degenerate normalization bounds");
    return std::clamp((raw - bounds.min) / (bounds.max - bounds.min), 0.0, 1.0);
}

std::vector<EpisodeTrace> rollout_batch(const policy::PolicyParams& params,
                                        const RewardMap& rewards, const GuideFn& guide, int K,
                                        const motifs::Vocabulary& vocab,
                                        const motifs::ScanConfig& scan_cfg, int length,
                                        const landscape::Normalization& bounds,
                                        uint64_t stream_seed) {
    std::vector<EpisodeTrace> traces(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k) {
        Rng rng(mix_seed(stream_seed, static_cast<uint64_t>(k)));
        EpisodeTrace& tr = traces[static_cast<size_t>(k)];

        policy::SampleResult sample = policy::sample_sequence(params, length, rng);
        tr.sequence = std::move(sample.sequence);
        tr.step_logprobs = std::move(sample.step_logprobs);
        tr.step_entropies = std::move(sample.step_entropies);
        tr.step_rewards.assign(static_cast<size_t>(length), 0.0);

        for (int i = 1; i <= length; ++i) {
            const auto hits = motifs::incremental_hits(
                std::string_view(tr.sequence).substr(0, static_cast<size_t>(i)), vocab, scan_cfg);
            for (const auto& h : hits) {
                tr.step_rewards[static_cast<size_t>(i - 1)] += rewards.reward(h.motif_id);
                tr.hits.push_back(h);
            }
        }

        double raw = 0.0;
        try {
            raw = guide(tr.sequence);
        } catch (const std::exception& e) {
            throw std::runtime_error("guide failed on episode " + std::to_string(k) + ": " +
                                     e.what());
        }
        tr.terminal_fitness = normalize_fitness(raw, bounds);
    }
    return traces;
}

policy::LossAndGrad reinforce_loss_and_grad(const policy::PolicyParams& params,
                                            const std::vector<EpisodeTrace>& traces,
                                            const std::vector<std::string>& replay_sequences,
                                            double baseline, const RunConfig& config) {
    if (traces.empty()) throw std::invalid_argument("reinforce update: no traces");
    policy::LossAndGrad out;
    out.grad = policy::zeros_like(params);

    const double inv_k = 1.0 / static_cast<double>(traces.size());
    for (const auto& tr : traces) {
        const double advantage = tr.total_return() - baseline;
        // -(G - b) * sum log pi - beta * sum entropy, averaged over episodes
        policy::accumulate_weighted_episode(params, tr.sequence, -advantage * inv_k,
                                            -config.entropy_coef * inv_k, out.loss, out.grad);
    }
    if (!replay_sequences.empty() && config.replay_fraction > 0) {
        const double w = config.replay_fraction / static_cast<double>(replay_sequences.size());
        for (const auto& seq : replay_sequences)
            policy::accumulate_weighted_episode(params, seq, -w, 0.0, out.loss, out.grad);
    }
    return out;
}

UpdateDiagnostics reinforce_update(policy::PolicyParams& params,
                                   const std::vector<EpisodeTrace>& traces, ReplayBuffer& replay,
                                   const RunConfig& config, BaselineState& baseline,
                                   Rng& replay_rng) {
    if (traces.empty()) throw std::invalid_argument("reinforce update: no traces");

    double mean_return = 0.0, mean_entropy = 0.0;
    size_t steps = 0;
    for (const auto& tr : traces) {
        mean_return += tr.total_return();
        for (double h : tr.step_entropies) mean_entropy += h;
        steps += tr.step_entropies.size();
    }
    mean_return /= static_cast<double>(traces.size());
    mean_entropy /= static_cast<double>(steps);

    if (!baseline.initialized) {
        baseline.value = config.use_baseline ? mean_return : 0.0;
        baseline.initialized = true;
    }
    const double b = config.use_baseline ? baseline.value : 0.0;

    std::vector<std::string> replay_sequences;
    if (config.replay_fraction > 0 && !replay.empty()) {
        const size_t count = std::max<size_t>(
            1, static_cast<size_t>(std::lround(config.replay_fraction * config.K)));
        replay_sequences = replay.sample_top_half(count, replay_rng);
    }

    policy::LossAndGrad lg = reinforce_loss_and_grad(params, traces, replay_sequences, b, config);
    if (!std::isfinite(lg.loss)) {
        std::ostringstream dump;
        dump << "reinforce update: non-finite loss; mean_return=" << mean_return
             << " baseline=" << b << " entropy=" << mean_entropy
             << " buffer_size=" << replay.size();
        throw std::runtime_error(dump.str());
    }
    policy::clip_gradient(lg.grad, 1.0);
    const double grad_norm = std::sqrt(lg.grad.squared_norm());
    params.axpy(-config.policy_lr, lg.grad);

    if (config.use_baseline)
        baseline.value = config.baseline_decay * baseline.value +
                         (1.0 - config.baseline_decay) * mean_return;

    UpdateDiagnostics diag;
    diag.loss = lg.loss;
    diag.mean_return = mean_return;
    diag.mean_entropy = mean_entropy;
    diag.grad_norm = grad_norm;
    diag.baseline = b;
    return diag;
}

void update_replay(ReplayBuffer& replay, const std::vector<EpisodeTrace>& traces) {
    for (const auto& tr : traces) replay.insert(tr.sequence, tr.terminal_fitness);
}

namespace {

std::vector<metrics::Scored> to_scored(const std::vector<EpisodeTrace>& traces) {
    std::vector<metrics::Scored> out;
    out.reserve(traces.size());
    for (const auto& tr : traces) out.push_back({tr.sequence, tr.terminal_fitness});
    return out;
}

}  // namespace

RunLog run_optimization(const RunConfig& config, const RunInputs& inputs) {
    config.validate();
    if (!inputs.pretrained || !inputs.role_table || !inputs.vocab || !inputs.guide)
        throw std::invalid_argument("run_optimization: missing inputs");

    policy::PolicyParams params = *inputs.pretrained;
    const RewardMap rewards(*inputs.role_table);
    ReplayBuffer replay(static_cast<size_t>(config.replay_capacity));
    BaselineState baseline;
    Rng replay_rng(mix_seed(config.seed, 0x4e91ULL));

    RunLog log;
    for (int round = 1; round <= config.E; ++round) {
        const uint64_t stream = mix_seed(config.seed, 0x7011ULL, static_cast<uint64_t>(round));
        std::vector<EpisodeTrace> traces =
            rollout_batch(params, rewards, inputs.guide, config.K, *inputs.vocab, inputs.scan_cfg,
                          config.sequence_length, inputs.bounds, stream);

        update_replay(replay, traces);
        const UpdateDiagnostics diag =
            reinforce_update(params, traces, replay, config, baseline, replay_rng);

        const auto scored = to_scored(traces);
        RoundRow row;
        row.round = round;
        row.metrics = metrics::compute_round_metrics(scored, config.top_k, config.best_m,
                                                     config.kmer_k);
        row.mean_return = diag.mean_return;
        row.mean_entropy = diag.mean_entropy;
        row.buffer_min = replay.min_fitness();
        row.buffer_max = replay.max_fitness();

        if (config.mode == Mode::offline_mbo) {
            if (!inputs.oracle) throw std::invalid_argument("offline_mbo: oracle required for evaluation");
            // evaluation only; never fed back into the policy
            std::vector<metrics::Scored> oracle_scored;
            oracle_scored.reserve(traces.size());
            for (const auto& tr : traces)
                oracle_scored.push_back(
                    {tr.sequence, normalize_fitness(inputs.oracle(tr.sequence), inputs.bounds)});
            row.oracle_top = metrics::top_k_mean(oracle_scored, std::min(config.top_k, config.K));
        } else {
            row.oracle_top = row.metrics.top;
        }
        log.rows.push_back(row);

        if (round == config.E) {
            for (const auto& tr : traces) {
                Proposal p;
                p.sequence = tr.sequence;
                p.guide_score = tr.terminal_fitness;
                if (config.mode == Mode::offline_mbo)
                    p.oracle_score = normalize_fitness(inputs.oracle(tr.sequence), inputs.bounds);
                log.final_proposals.push_back(std::move(p));
            }
        }
    }
    return log;
}

RunLog greedy_baseline(const GreedyConfig& config, const GuideFn& guide,
                       const std::vector<std::string>& seed_pool,
                       const landscape::Normalization& bounds, const GuideFn& oracle) {
    if (seed_pool.empty()) throw std::invalid_argument("greedy_baseline: empty seed dataset");
    if (config.K < 2 || config.E < 1) throw std::invalid_argument("greedy_baseline: bad config");

    Rng rng(mix_seed(config.seed, 0x9eedULL));
    std::vector<metrics::Scored> pool;
    pool.reserve(static_cast<size_t>(config.K));
    for (int i = 0; i < config.K; ++i) {
        const auto& seq = seed_pool[rng.next_below(static_cast<uint32_t>(seed_pool.size()))];
        pool.push_back({seq, normalize_fitness(guide(seq), bounds)});
    }
    const int length = static_cast<int>(pool[0].sequence.size());
    const double mut_rate = config.mutation_rate_scale / static_cast<double>(length);

    RunLog log;
    for (int round = 1; round <= config.E; ++round) {
        std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) {
            if (a.fitness != b.fitness) return a.fitness > b.fitness;
            return a.sequence < b.sequence;
        });
        const size_t survivors = std::max<size_t>(1, pool.size() / 10);
        pool.resize(survivors);

        while (pool.size() < static_cast<size_t>(config.K)) {
            const auto& parent = pool[rng.next_below(static_cast<uint32_t>(survivors))].sequence;
            std::string child = parent;
            for (auto& c : child) {
                if (rng.next_unit() < mut_rate) {
                    char nc = c;
                    while (nc == c) nc = motifs::kBases[rng.next_below(4)];
                    c = nc;
                }
            }
            pool.push_back({child, normalize_fitness(guide(child), bounds)});
        }

        RoundRow row;
        row.round = round;
        row.metrics = metrics::compute_round_metrics(pool, config.top_k, config.best_m,
                                                     config.kmer_k);
        double best = pool[0].fitness, worst = pool[0].fitness, mean = 0.0;
        for (const auto& p : pool) {
            best = std::max(best, p.fitness);
            worst = std::min(worst, p.fitness);
            mean += p.fitness;
        }
        row.mean_return = mean / static_cast<double>(pool.size());
        row.mean_entropy = 0.0;
        row.buffer_min = worst;
        row.buffer_max = best;
        if (oracle) {
            std::vector<metrics::Scored> oracle_scored;
            oracle_scored.reserve(pool.size());
            for (const auto& p : pool)
                oracle_scored.push_back({p.sequence, normalize_fitness(oracle(p.sequence), bounds)});
            row.oracle_top = metrics::top_k_mean(oracle_scored, std::min(config.top_k, config.K));
        } else {
            row.oracle_top = row.metrics.top;
        }
        log.rows.push_back(row);

        if (round == config.E) {
            for (const auto& p : pool) {
                Proposal prop;
                prop.sequence = p.sequence;
                prop.guide_score = p.fitness;
                if (oracle)
                    prop.oracle_score = normalize_fitness(oracle(p.sequence), bounds);
                log.final_proposals.push_back(std::move(prop));
            }
        }
    }
    return log;
}

std::string run_log_to_csv(const RunLog& log) {
    std::string out =
        "round,top,medium,diversity,emb_similarity,mean_return,mean_entropy,buffer_min,"
        "buffer_max,oracle_top\n";
    for (const auto& r : log.rows) {
        out += std::to_string(r.round) + "," + io::fmt_f6(r.metrics.top) + "," +
               io::fmt_f6(r.metrics.medium) + "," + io::fmt_f6(r.metrics.diversity) + "," +
               io::fmt_f6(r.metrics.emb_similarity) + "," + io::fmt_f6(r.mean_return) + "," +
               io::fmt_f6(r.mean_entropy) + "," + io::fmt_f6(r.buffer_min) + "," +
               io::fmt_f6(r.buffer_max) + "," + io::fmt_f6(r.oracle_top) + "\n";
    }
    return out;
}

RunLog run_log_from_csv(const std::string& text) {
    const auto rows = io::parse_csv(text);
    if (rows.empty() || rows[0].size() != 10 || rows[0][0] != "round")
        throw std::runtime_error("run log CSV: unexpected header");
    RunLog log;
    for (size_t i = 1; i < rows.size(); ++i) {
        const auto& f = rows[i];
        if (f.size() != 10) throw std::runtime_error("run log CSV: bad row " + std::to_string(i));
        RoundRow r;
        r.round = std::stoi(f[0]);
        r.metrics.top = std::stod(f[1]);
        r.metrics.medium = std::stod(f[2]);
        r.metrics.diversity = std::stod(f[3]);
        r.metrics.emb_similarity = std::stod(f[4]);
        r.mean_return = std::stod(f[5]);
        r.mean_entropy = std::stod(f[6]);
        r.buffer_min = std::stod(f[7]);
        r.buffer_max = std::stod(f[8]);
        r.oracle_top = std::stod(f[9]);
        log.rows.push_back(r);
    }
    return log;
}

std::string proposals_to_csv(const std::vector<Proposal>& proposals) {
    const bool with_oracle =
        !proposals.empty() && proposals.front().oracle_score.has_value();
    std::string out = with_oracle ? "sequence,guide_score,oracle_score\n" : "sequence,guide_score\n";
    for (const auto& p : proposals) {
        out += p.sequence + "," + io::fmt_g17(p.guide_score);
        if (with_oracle) out += "," + io::fmt_g17(p.oracle_score.value_or(0.0));
        out += "\n";
    }
    return out;
}

}  // namespace credo::optimizer
