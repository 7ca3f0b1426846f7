#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "credo/motifs.hpp"

namespace credo::landscape {

struct Interaction {
    std::string motif_a;
    std::string motif_b;
    double coefficient = 0.0;
};

// Ground-truth fitness function with planted motif roles:
//   clamp(intercept + sum_t w_t * h_t + sum_(a,b) c_ab * min(h_a, h_b), +/- bound)
struct LandscapeSpec {
    std::vector<std::string> vocab_ids;
    std::vector<double> weights;  // aligned with vocab_ids
    std::vector<Interaction> interactions;
    double intercept = 0.0;
    double saturation_bound = 10.0;
    double label_noise_sd = 0.0;
    uint64_t seed = 1;

    void validate() const;
    int index_of(const std::string& motif_id) const;  // -1 if absent
};

nlohmann::json spec_to_json(const LandscapeSpec& spec);
LandscapeSpec spec_from_json(const nlohmann::json& j);

struct Record {
    std::string sequence;
    double fitness = 0.0;
};

struct Normalization {
    double min = 0.0;
    double max = 1.0;
};

struct LabeledDataset {
    std::vector<Record> records;
    std::optional<Normalization> normalization;
};

double oracle_from_features(const std::vector<int>& features, const LandscapeSpec& spec);

// Noiseless ground-truth fitness of a sequence; features come from the scanner.
double oracle_fitness(std::string_view seq, const LandscapeSpec& spec,
                      const motifs::Vocabulary& vocab, const motifs::ScanConfig& scan_cfg = {});

// n uniform random sequences of the given length, each with a Poisson(embed_rate)
// number of planted consensus embeddings (uniform motif, either strand, uniform
// position preferring non-overlapping slots). Labels are oracle fitness plus
// Gaussian noise. Bitwise deterministic given the seed; records use derived
// per-record streams.
LabeledDataset generate_dataset(int n, int length, const LandscapeSpec& spec,
                                const motifs::Vocabulary& vocab, double embed_rate,
                                uint64_t seed, const motifs::ScanConfig& scan_cfg = {});

LabeledDataset minmax_normalize(const LabeledDataset& ds);
// Maps normalized fitness values back to raw via the stored bounds.
LabeledDataset denormalize(const LabeledDataset& ds);

enum class PartitionKind { easy, middle, hard, offline95, full, custom };

struct PartitionSpec {
    PartitionKind kind = PartitionKind::full;
    double lower = 0.0;    // percentile (or raw cutoff in absolute mode)
    double upper = 100.0;
    bool absolute = false;  // bounds are raw fitness cutoffs instead of percentiles

    static PartitionSpec named(PartitionKind kind);
    static PartitionSpec named(const std::string& name);
};

// Linear-interpolation percentile of the values (numpy convention).
double percentile(std::vector<double> values, double p);

// Records whose fitness lies in [lower, upper) of the empirical distribution
// (lower-inclusive). `full` is the identity; throws on an empty result.
LabeledDataset partition(const LabeledDataset& ds, const PartitionSpec& spec);

// Deterministic synthetic vocabulary: peaked count matrices around random
// consensus sequences, rejecting palindromes and cross-motif substring
// collisions so hits stay unambiguous.
motifs::Vocabulary make_vocabulary(int n_motifs, int min_len, int max_len, uint64_t seed,
                                   double pseudocount = 0.1);

// Desk-scale default roles over a vocabulary: first `n_act` ids get +weight,
// the next `n_rep` get -weight, the rest are neutral.
LandscapeSpec make_planted_spec(const std::vector<std::string>& vocab_ids, int n_act, int n_rep,
                                double weight = 1.0);

std::string dataset_to_csv(const LabeledDataset& ds);
LabeledDataset dataset_from_csv(const std::string& text);

}  // namespace credo::landscape
