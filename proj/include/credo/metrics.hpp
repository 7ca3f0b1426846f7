#pragma once

#include <string>
#include <vector>

namespace credo::metrics {

struct Scored {
    std::string sequence;
    double fitness = 0.0;
};

struct RoundMetrics {
    double top = 0.0;
    double medium = 0.0;
    double diversity = 0.0;
    double emb_similarity = 0.0;
};

// Mean fitness of the k best proposals (ties broken by lexicographic sequence).
double top_k_mean(const std::vector<Scored>& proposals, int k = 16);

// Median (mean-of-middle-two) fitness of the m best proposals.
double median_of_top(const std::vector<Scored>& proposals, int m = 128);

// Median pairwise Hamming distance within the m best (equal-length) proposals.
double diversity(const std::vector<Scored>& proposals, int m = 128);

// Mean pairwise cosine similarity of overlapping k-mer count embeddings
// (forward strand) of the m best proposals.
double emb_similarity(const std::vector<Scored>& proposals, int m = 128, int k = 4);

RoundMetrics compute_round_metrics(const std::vector<Scored>& proposals, int top_k = 16,
                                   int best_m = 128, int kmer_k = 4);

std::vector<double> kmer_counts(const std::string& sequence, int k);

}  // namespace credo::metrics
