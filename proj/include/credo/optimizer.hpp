#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "credo/attribution.hpp"
#include "credo/landscape.hpp"
#include "credo/metrics.hpp"
#include "credo/motifs.hpp"
#include "credo/policy.hpp"

namespace credo::optimizer {

// One generated episode. step_rewards holds only the per-step TFBS shaping
// terms; the normalized terminal fitness is kept separately and applies at
// the final step only.
struct EpisodeTrace {
    std::string sequence;
    std::vector<double> step_rewards;
    std::vector<double> step_logprobs;
    std::vector<double> step_entropies;
    double terminal_fitness = 0.0;
    std::vector<motifs::MotifHit> hits;

    double total_return() const;
};

// Best-seen sequences ordered by fitness descending (lexicographic sequence
// tie-break), deduplicated by sequence keeping the max fitness.
class ReplayBuffer {
public:
    explicit ReplayBuffer(size_t capacity = 512) : capacity_(capacity) {}

    void insert(const std::string& sequence, double fitness);
    size_t size() const { return entries_.size(); }
    size_t capacity() const { return capacity_; }
    bool empty() const { return entries_.empty(); }
    double min_fitness() const;
    double max_fitness() const;
    const std::vector<std::pair<std::string, double>>& entries() const { return entries_; }

    // Uniform draw (with replacement) from the better half of the buffer.
    std::vector<std::string> sample_top_half(size_t count, Rng& rng) const;

private:
    size_t capacity_;
    std::vector<std::pair<std::string, double>> entries_;  // sorted desc by (fitness, -seq)
};

enum class Mode { oracle_guided, offline_mbo };

struct RunConfig {
    int K = 256;               // proposals per round
    int E = 100;               // optimization rounds
    double alpha = 0.01;       // TFBS reward scale (already applied inside the role table)
    double policy_lr = 0.3;    // norm-clipped plain SGD; small scorer needs a large step
    double entropy_coef = 0.01;
    double replay_fraction = 0.25;
    int replay_capacity = 64;
    bool use_baseline = true;
    double baseline_decay = 0.9;
    Mode mode = Mode::oracle_guided;
    uint64_t seed = 11;
    int sequence_length = 80;
    int top_k = 16;
    int best_m = 128;
    int kmer_k = 4;

    void validate() const;
};

using GuideFn = std::function<double(const std::string&)>;

// Per-motif shaping rewards from a role table, resolved to id lookups.
class RewardMap {
public:
    RewardMap() = default;
    explicit RewardMap(const attribution::RoleTable& table);
    double reward(const std::string& motif_id) const;
    bool all_zero() const;

private:
    std::unordered_map<std::string, double> rewards_;
};

// K episodes with incremental hit detection; the terminal guide score is
// min-max mapped through the dataset bounds and clamped to [0,1]. Episode k
// uses the rng stream derived from (stream_seed, k), so any evaluation order
// produces identical traces.
std::vector<EpisodeTrace> rollout_batch(const policy::PolicyParams& params,
                                        const RewardMap& rewards, const GuideFn& guide, int K,
                                        const motifs::Vocabulary& vocab,
                                        const motifs::ScanConfig& scan_cfg, int length,
                                        const landscape::Normalization& bounds,
                                        uint64_t stream_seed);

double normalize_fitness(double raw, const landscape::Normalization& bounds);

struct UpdateDiagnostics {
    double loss = 0.0;
    double mean_return = 0.0;
    double mean_entropy = 0.0;  // per-step mean over the batch
    double grad_norm = 0.0;
    double baseline = 0.0;
};

// REINFORCE loss with moving-average baseline, entropy bonus, and hill-climb
// imitation on replay sequences:
//   loss = -mean_k (G_k - b) * sum_i log pi + beta-term + replay_fraction * mean replay NLL
// Exposed separately from the update so the gradient can be finite-difference
// checked with episodes and replay draws held fixed.
policy::LossAndGrad reinforce_loss_and_grad(const policy::PolicyParams& params,
                                            const std::vector<EpisodeTrace>& traces,
                                            const std::vector<std::string>& replay_sequences,
                                            double baseline, const RunConfig& config);

struct BaselineState {
    bool initialized = false;
    double value = 0.0;
};

// One SGD step with gradient clipping; updates the baseline EMA and returns
// diagnostics. Throws on a non-finite loss with a state dump in the message.
UpdateDiagnostics reinforce_update(policy::PolicyParams& params,
                                   const std::vector<EpisodeTrace>& traces, ReplayBuffer& replay,
                                   const RunConfig& config, BaselineState& baseline, Rng& replay_rng);

void update_replay(ReplayBuffer& replay, const std::vector<EpisodeTrace>& traces);

struct RoundRow {
    int round = 0;
    metrics::RoundMetrics metrics;
    double mean_return = 0.0;
    double mean_entropy = 0.0;
    double buffer_min = 0.0;
    double buffer_max = 0.0;
    double oracle_top = 0.0;  // oracle-scored Top; equals metrics.top in oracle-guided mode
};

struct Proposal {
    std::string sequence;
    double guide_score = 0.0;              // normalized guide fitness
    std::optional<double> oracle_score;    // normalized oracle fitness (offline mode)
};

struct RunLog {
    std::vector<RoundRow> rows;
    std::vector<Proposal> final_proposals;
};

struct RunInputs {
    const policy::PolicyParams* pretrained = nullptr;
    const attribution::RoleTable* role_table = nullptr;
    GuideFn guide;                       // oracle or surrogate, raw fitness
    GuideFn oracle;                      // evaluation-only oracle, raw fitness
    const motifs::Vocabulary* vocab = nullptr;
    motifs::ScanConfig scan_cfg;
    landscape::Normalization bounds;
};

RunLog run_optimization(const RunConfig& config, const RunInputs& inputs);

// Directed-evolution reference: keep the top 10% of the pool by guide score,
// refill with point-mutated children (rate 1/L per base), re-score.
struct GreedyConfig {
    int K = 256;
    int E = 100;
    double mutation_rate_scale = 1.0;  // per-base rate = scale / L
    int top_k = 16;
    int best_m = 128;
    int kmer_k = 4;
    uint64_t seed = 11;
};

RunLog greedy_baseline(const GreedyConfig& config, const GuideFn& guide,
                       const std::vector<std::string>& seed_pool,
                       const landscape::Normalization& bounds, const GuideFn& oracle = nullptr);

std::string run_log_to_csv(const RunLog& log);
RunLog run_log_from_csv(const std::string& text);
std::string proposals_to_csv(const std::vector<Proposal>& proposals);

}  // namespace credo::optimizer
