#include "credo/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "credo/io.hpp"
#include "credo/rng.hpp"

namespace credo::landscape {

void LandscapeSpec::validate() const {
    if (vocab_ids.size() != weights.size())
        throw std::invalid_argument("landscape spec: weights not aligned with vocab_ids");
    if (saturation_bound <= 0) throw std::invalid_argument("landscape spec: saturation_bound must be > 0");
    if (label_noise_sd < 0) throw std::invalid_argument("landscape spec: negative label_noise_sd");
    for (const auto& ia : interactions) {
        if (index_of(ia.motif_a) < 0 || index_of(ia.motif_b) < 0)
            throw std::invalid_argument("landscape spec: interaction references unknown motif " +
                                        ia.motif_a + "/" + ia.motif_b);
    }
}

int LandscapeSpec::index_of(const std::string& motif_id) const {
    for (size_t i = 0; i < vocab_ids.size(); ++i)
        if (vocab_ids[i] == motif_id) return static_cast<int>(i);
    return -1;
}

nlohmann::json spec_to_json(const LandscapeSpec& spec) {
    nlohmann::json j;
    j["vocab_ids"] = spec.vocab_ids;
    j["weights"] = spec.weights;
    nlohmann::json ints = nlohmann::json::array();
    for (const auto& ia : spec.interactions)
        ints.push_back({{"motif_a", ia.motif_a}, {"motif_b", ia.motif_b}, {"coefficient", ia.coefficient}});
    j["interactions"] = ints;
    j["intercept"] = spec.intercept;
    j["saturation_bound"] = spec.saturation_bound;
    j["label_noise_sd"] = spec.label_noise_sd;
    j["seed"] = spec.seed;
    return j;
}

LandscapeSpec spec_from_json(const nlohmann::json& j) {
    LandscapeSpec spec;
    spec.vocab_ids = j.at("vocab_ids").get<std::vector<std::string>>();
    spec.weights = j.at("weights").get<std::vector<double>>();
    for (const auto& ia : j.at("interactions"))
        spec.interactions.push_back({ia.at("motif_a").get<std::string>(),
                                     ia.at("motif_b").get<std::string>(),
                                     ia.at("coefficient").get<double>()});
    spec.intercept = j.at("intercept").get<double>();
    spec.saturation_bound = j.at("saturation_bound").get<double>();
    spec.label_noise_sd = j.at("label_noise_sd").get<double>();
    spec.seed = j.at("seed").get<uint64_t>();
    spec.validate();
    return spec;
}

double oracle_from_features(const std::vector<int>& features, const LandscapeSpec& spec) {
    if (features.size() != spec.vocab_ids.size())
        throw std::invalid_argument("oracle: feature vector width " + std::to_string(features.size()) +
                                    " does not match vocabulary size " +
                                    std::to_string(spec.vocab_ids.size()));
    double v = spec.intercept;
    for (size_t i = 0; i < features.size(); ++i) v += spec.weights[i] * features[i];
    for (const auto& ia : spec.interactions) {
        const int a = spec.index_of(ia.motif_a);
        const int b = spec.index_of(ia.motif_b);
        v += ia.coefficient * std::min(features[a], features[b]);
    }
    return std::clamp(v, -spec.saturation_bound, spec.saturation_bound);
}

double oracle_fitness(std::string_view seq, const LandscapeSpec& spec,
                      const motifs::Vocabulary& vocab, const motifs::ScanConfig& scan_cfg) {
    if (vocab.size() != spec.vocab_ids.size())
        throw std::invalid_argument("oracle: vocabulary size mismatch");
    for (size_t i = 0; i < vocab.size(); ++i)
        if (vocab[i].id() != spec.vocab_ids[i])
            throw std::invalid_argument("oracle: vocabulary id mismatch at index " + std::to_string(i));
    return oracle_from_features(motifs::extract_features(seq, vocab, scan_cfg), spec);
}

LabeledDataset generate_dataset(int n, int length, const LandscapeSpec& spec,
                                const motifs::Vocabulary& vocab, double embed_rate,
                                uint64_t seed, const motifs::ScanConfig& scan_cfg) {
    if (n < 1) throw std::invalid_argument("generate_dataset: n must be >= 1");
    if (embed_rate < 0 || embed_rate > 1)
        throw std::invalid_argument("generate_dataset: embed_rate must be in [0,1]");
    spec.validate();
    int max_motif_len = 0;
    for (const auto& pfm : vocab) max_motif_len = std::max(max_motif_len, pfm.length());
    if (embed_rate > 0 && length < max_motif_len)
        throw std::invalid_argument("generate_dataset: length " + std::to_string(length) +
                                    " is smaller than the longest motif (" +
                                    std::to_string(max_motif_len) + ")");

    LabeledDataset ds;
    ds.records.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        Rng rng(mix_seed(seed, static_cast<uint64_t>(i)));
        std::string seq(static_cast<size_t>(length), 'A');
        for (auto& c : seq) c = motifs::kBases[rng.next_below(4)];

        const int k = rng.poisson(embed_rate);
        std::vector<std::pair<int, int>> placed;  // [start, end) of embeddings
        for (int e = 0; e < k; ++e) {
            const auto& pfm = vocab[rng.next_below(static_cast<uint32_t>(vocab.size()))];
            std::string motif = pfm.consensus();
            if (rng.next_below(2) == 1) motif = motifs::reverse_complement(motif);
            const int span = static_cast<int>(motif.size());
            const uint32_t slots = static_cast<uint32_t>(length - span + 1);
            int start = static_cast<int>(rng.next_below(slots));
            for (int attempt = 0; attempt < 8; ++attempt) {
                const bool overlaps = std::any_of(placed.begin(), placed.end(), [&](auto iv) {
                    return start < iv.second && start + span > iv.first;
                });
                if (!overlaps) break;
                start = static_cast<int>(rng.next_below(slots));
            }
            seq.replace(static_cast<size_t>(start), static_cast<size_t>(span), motif);
            placed.emplace_back(start, start + span);
        }

        double label = oracle_fitness(seq, spec, vocab, scan_cfg);
        if (spec.label_noise_sd > 0) label += spec.label_noise_sd * rng.normal();
        ds.records[static_cast<size_t>(i)] = {std::move(seq), label};
    }
    return ds;
}

LabeledDataset minmax_normalize(const LabeledDataset& ds) {
    if (ds.normalization) return ds;  // already normalized with stored bounds
    if (ds.records.size() < 2)
        throw std::invalid_argument("minmax_normalize: need at least 2 records");
    double lo = ds.records[0].fitness, hi = ds.records[0].fitness;
    for (const auto& r : ds.records) {
        lo = std::min(lo, r.fitness);
        hi = std::max(hi, r.fitness);
    }
    if (hi <= lo) throw std::invalid_argument("minmax_normalize: constant-fitness dataset");
    LabeledDataset out;
    out.records.reserve(ds.records.size());
    for (const auto& r : ds.records)
        out.records.push_back({r.sequence, (r.fitness - lo) / (hi - lo)});
    out.normalization = Normalization{lo, hi};
    return out;
}

LabeledDataset denormalize(const LabeledDataset& ds) {
    if (!ds.normalization) return ds;
    const auto [lo, hi] = *ds.normalization;
    LabeledDataset out;
    out.records.reserve(ds.records.size());
    for (const auto& r : ds.records)
        out.records.push_back({r.sequence, r.fitness * (hi - lo) + lo});
    return out;
}

PartitionSpec PartitionSpec::named(PartitionKind kind) {
    switch (kind) {
        case PartitionKind::easy: return {kind, 60.0, 80.0, false};
        case PartitionKind::middle: return {kind, 40.0, 60.0, false};
        case PartitionKind::hard: return {kind, 20.0, 40.0, false};
        case PartitionKind::offline95: return {kind, 0.0, 95.0, false};
        case PartitionKind::full: return {kind, 0.0, 100.0, false};
        case PartitionKind::custom: break;
    }
    throw std::invalid_argument("PartitionSpec::named: custom has no canonical bounds");
}

PartitionSpec PartitionSpec::named(const std::string& name) {
    if (name == "easy") return named(PartitionKind::easy);
    if (name == "middle") return named(PartitionKind::middle);
    if (name == "hard") return named(PartitionKind::hard);
    if (name == "offline95") return named(PartitionKind::offline95);
    if (name == "full") return named(PartitionKind::full);
    throw std::invalid_argument("unknown partition kind: " + name);
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("percentile: empty input");
    if (p < 0 || p > 100) throw std::invalid_argument("percentile: p out of [0,100]");
    std::sort(values.begin(), values.end());
    const double idx = p / 100.0 * static_cast<double>(values.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(idx));
    const size_t hi = static_cast<size_t>(std::ceil(idx));
    const double frac = idx - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

LabeledDataset partition(const LabeledDataset& ds, const PartitionSpec& spec) {
    if (spec.lower >= spec.upper)
        throw std::invalid_argument("partition: lower bound must be < upper bound");
    if (spec.kind == PartitionKind::full) return ds;

    double lo, hi;
    if (spec.absolute) {
        lo = spec.lower;
        hi = spec.upper;
    } else {
        std::vector<double> fitness;
        fitness.reserve(ds.records.size());
        for (const auto& r : ds.records) fitness.push_back(r.fitness);
        lo = percentile(fitness, spec.lower);
        hi = percentile(fitness, spec.upper);
    }

    LabeledDataset out;
    out.normalization = ds.normalization;
    for (const auto& r : ds.records)
        if (r.fitness >= lo && r.fitness < hi) out.records.push_back(r);
    if (out.records.empty()) throw std::runtime_error("partition: empty result");
    return out;
}

motifs::Vocabulary make_vocabulary(int n_motifs, int min_len, int max_len, uint64_t seed,
                                   double pseudocount) {
    if (n_motifs < 1 || min_len < 1 || max_len < min_len)
        throw std::invalid_argument("make_vocabulary: bad arguments");
    Rng rng(mix_seed(seed, 0x76f0cabULL));
    motifs::Vocabulary vocab;
    std::vector<std::string> taken;  // consensus strings and their reverse complements
    for (int m = 0; m < n_motifs; ++m) {
        const int len = min_len + static_cast<int>(rng.next_below(
                                      static_cast<uint32_t>(max_len - min_len + 1)));
        std::string consensus;
        for (int attempt = 0; attempt < 1000; ++attempt) {
            consensus.assign(static_cast<size_t>(len), 'A');
            for (auto& c : consensus) c = motifs::kBases[rng.next_below(4)];
            const std::string rc = motifs::reverse_complement(consensus);
            if (rc == consensus) continue;  // palindrome: would double-count every hit
            const bool collides = std::any_of(taken.begin(), taken.end(), [&](const std::string& t) {
                return t.find(consensus) != std::string::npos || consensus.find(t) != std::string::npos ||
                       t.find(rc) != std::string::npos || rc.find(t) != std::string::npos;
            });
            if (!collides) break;
            consensus.clear();
        }
        if (consensus.empty())
            throw std::runtime_error("make_vocabulary: could not draw a collision-free consensus");
        taken.push_back(consensus);
        taken.push_back(motifs::reverse_complement(consensus));

        std::vector<std::array<double, 4>> counts(static_cast<size_t>(len), {0, 0, 0, 0});
        for (int k = 0; k < len; ++k) counts[static_cast<size_t>(k)][motifs::base_index(consensus[static_cast<size_t>(k)])] = 12.0;
        char id[16];
        std::snprintf(id, sizeof(id), "M%02d", m + 1);
        vocab.emplace_back(id, std::string("synthetic_") + id, std::move(counts), pseudocount);
    }
    return vocab;
}

LandscapeSpec make_planted_spec(const std::vector<std::string>& vocab_ids, int n_act, int n_rep,
                                double weight) {
    if (n_act + n_rep > static_cast<int>(vocab_ids.size()))
        throw std::invalid_argument("make_planted_spec: more roles than motifs");
    LandscapeSpec spec;
    spec.vocab_ids = vocab_ids;
    spec.weights.assign(vocab_ids.size(), 0.0);
    for (int i = 0; i < n_act; ++i) spec.weights[static_cast<size_t>(i)] = weight;
    for (int i = 0; i < n_rep; ++i) spec.weights[static_cast<size_t>(n_act + i)] = -weight;
    return spec;
}

std::string dataset_to_csv(const LabeledDataset& ds) {
    std::string out = "sequence,fitness\n";
    for (const auto& r : ds.records) out += r.sequence + "," + io::fmt_g17(r.fitness) + "\n";
    return out;
}

LabeledDataset dataset_from_csv(const std::string& text) {
    const auto rows = io::parse_csv(text);
    if (rows.empty() || rows[0].size() != 2 || rows[0][0] != "sequence")
        throw std::runtime_error("dataset CSV: missing 'sequence,fitness' header");
    LabeledDataset ds;
    for (size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 2) throw std::runtime_error("dataset CSV: bad row " + std::to_string(i));
        motifs::validate_sequence(rows[i][0]);
        ds.records.push_back({rows[i][0], std::stod(rows[i][1])});
    }
    return ds;
}

}  // namespace credo::landscape
