#include "credo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "credo/motifs.hpp"

namespace credo::metrics {

namespace {

// Best m by fitness, descending; lexicographic sequence breaks ties so
// selection is reproducible.
std::vector<Scored> best_of(const std::vector<Scored>& proposals, int m) {
    std::vector<Scored> sorted = proposals;
    std::sort(sorted.begin(), sorted.end(), [](const Scored& a, const Scored& b) {
        if (a.fitness != b.fitness) return a.fitness > b.fitness;
        return a.sequence < b.sequence;
    });
    if (m < static_cast<int>(sorted.size())) sorted.resize(static_cast<size_t>(m));
    return sorted;
}

double median_of(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty set");
    std::sort(v.begin(), v.end());
    const size_t mid = v.size() / 2;
    if (v.size() % 2 == 1) return v[mid];
    return 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

double top_k_mean(const std::vector<Scored>& proposals, int k) {
    if (static_cast<int>(proposals.size()) < k || k < 1)
        throw std::invalid_argument("top_k_mean: need at least k proposals");
    const auto best = best_of(proposals, k);
    double s = 0.0;
    for (const auto& b : best) s += b.fitness;
    return s / static_cast<double>(best.size());
}

double median_of_top(const std::vector<Scored>& proposals, int m) {
    if (static_cast<int>(proposals.size()) < m || m < 1)
        throw std::invalid_argument("median_of_top: need at least m proposals");
    const auto best = best_of(proposals, m);
    std::vector<double> fit;
    fit.reserve(best.size());
    for (const auto& b : best) fit.push_back(b.fitness);
    return median_of(std::move(fit));
}

double diversity(const std::vector<Scored>& proposals, int m) {
    if (proposals.size() < 2) throw std::invalid_argument("diversity: need at least 2 proposals");
    const auto best = best_of(proposals, m);
    const size_t len = best[0].sequence.size();
    for (const auto& b : best)
        if (b.sequence.size() != len)
            throw std::invalid_argument("diversity: sequences must have equal length");
    std::vector<double> dists;
    dists.reserve(best.size() * (best.size() - 1) / 2);
    for (size_t i = 0; i < best.size(); ++i) {
        for (size_t j = i + 1; j < best.size(); ++j) {
            int d = 0;
            const std::string& a = best[i].sequence;
            const std::string& b = best[j].sequence;
            for (size_t p = 0; p < len; ++p) d += a[p] != b[p] ? 1 : 0;
            dists.push_back(static_cast<double>(d));
        }
    }
    return median_of(std::move(dists));
}

std::vector<double> kmer_counts(const std::string& sequence, int k) {
    if (k < 1) throw std::invalid_argument("kmer_counts: k must be >= 1");
    std::vector<double> counts(size_t{1} << (2 * k), 0.0);
    if (static_cast<int>(sequence.size()) < k) return counts;
    const uint32_t mask = (uint32_t{1} << (2 * k)) - 1;
    uint32_t code = 0;
    for (size_t i = 0; i < sequence.size(); ++i) {
        code = ((code << 2) | static_cast<uint32_t>(motifs::base_index(sequence[i]))) & mask;
        if (i + 1 >= static_cast<size_t>(k)) counts[code] += 1.0;
    }
    return counts;
}

double emb_similarity(const std::vector<Scored>& proposals, int m, int k) {
    if (proposals.size() < 2)
        throw std::invalid_argument("emb_similarity: need at least 2 proposals");
    const auto best = best_of(proposals, m);
    std::vector<std::vector<double>> embs;
    std::vector<double> norms;
    embs.reserve(best.size());
    for (const auto& b : best) {
        embs.push_back(kmer_counts(b.sequence, k));
        double n2 = 0.0;
        for (double v : embs.back()) n2 += v * v;
        norms.push_back(std::sqrt(n2));
    }
    double total = 0.0;
    size_t pairs = 0;
    for (size_t i = 0; i < embs.size(); ++i) {
        for (size_t j = i + 1; j < embs.size(); ++j) {
            double dot = 0.0;
            for (size_t p = 0; p < embs[i].size(); ++p) dot += embs[i][p] * embs[j][p];
            const double denom = norms[i] * norms[j];
            total += denom > 0 ? dot / denom : 0.0;
            ++pairs;
        }
    }
    return total / static_cast<double>(pairs);
}

RoundMetrics compute_round_metrics(const std::vector<Scored>& proposals, int top_k, int best_m,
                                   int kmer_k) {
    const int n = static_cast<int>(proposals.size());
    RoundMetrics rm;
    rm.top = top_k_mean(proposals, std::min(top_k, n));
    rm.medium = median_of_top(proposals, std::min(best_m, n));
    rm.diversity = diversity(proposals, std::min(best_m, n));
    rm.emb_similarity = emb_similarity(proposals, std::min(best_m, n), kmer_k);
    return rm;
}

}  // namespace credo::metrics
