#include "credo/motifs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "credo/io.hpp"

namespace credo::motifs {

int base_index(char c) {
    switch (c) {
        case 'A': return 0;
        case 'C': return 1;
        case 'G': return 2;
        case 'T': return 3;
        default: throw std::invalid_argument(std::string("invalid nucleotide: '") + c + "'");
    }
}

char complement(char c) {
    switch (c) {
        case 'A': return 'T';
        case 'C': return 'G';
        case 'G': return 'C';
        case 'T': return 'A';
        default: throw std::invalid_argument(std::string("invalid nucleotide: '") + c + "'");
    }
}

std::string reverse_complement(std::string_view seq) {
    std::string out(seq.size(), ' ');
    for (size_t i = 0; i < seq.size(); ++i) out[i] = complement(seq[seq.size() - 1 - i]);
    return out;
}

void validate_sequence(std::string_view seq) {
    if (seq.empty()) throw std::invalid_argument("empty sequence");
    for (char c : seq) base_index(c);
}

PositionFrequencyMatrix::PositionFrequencyMatrix(std::string motif_id, std::string name,
                                                 std::vector<std::array<double, 4>> counts,
                                                 double pseudocount)
    : id_(std::move(motif_id)), name_(std::move(name)), counts_(std::move(counts)),
      pseudocount_(pseudocount) {
    if (counts_.empty()) throw std::invalid_argument("motif " + id_ + ": empty count matrix");
    if (pseudocount_ < 0) throw std::invalid_argument("motif " + id_ + ": negative pseudocount");
    const int len = length();
    probs_.resize(len);
    log_probs_.resize(len);
    rc_log_probs_.resize(len);
    max_log_score_ = 0.0;
    max_log_odds_ = 0.0;
    for (int k = 0; k < len; ++k) {
        double row_sum = 0.0;
        for (int b = 0; b < 4; ++b) {
            if (counts_[k][b] < 0)
                throw std::invalid_argument("motif " + id_ + ": negative count");
            row_sum += counts_[k][b] + pseudocount_;
        }
        if (row_sum <= 0)
            throw std::invalid_argument("motif " + id_ + ": all-zero row with zero pseudocount");
        double row_max = 0.0;
        for (int b = 0; b < 4; ++b) {
            const double p = (counts_[k][b] + pseudocount_) / row_sum;
            probs_[k][b] = p;
            log_probs_[k][b] = std::log(p);
            row_max = std::max(row_max, p);
        }
        max_log_score_ += std::log(row_max);
        max_log_odds_ += std::log(row_max) - std::log(0.25);
    }
    for (int k = 0; k < len; ++k)
        for (int b = 0; b < 4; ++b) rc_log_probs_[k][b] = log_probs_[len - 1 - k][3 - b];
}

std::string PositionFrequencyMatrix::consensus() const {
    std::string out(static_cast<size_t>(length()), 'A');
    for (int k = 0; k < length(); ++k) {
        int best = 0;
        for (int b = 1; b < 4; ++b)
            if (probs_[k][b] > probs_[k][best]) best = b;
        out[static_cast<size_t>(k)] = kBases[best];
    }
    return out;
}

namespace {

// One "A [ 1 2 3 ]" row; returns the counts and checks the row label.
std::vector<double> parse_jaspar_row(const std::string& line, char expected, const std::string& id) {
    std::istringstream in(line);
    std::string label;
    in >> label;
    if (label.size() != 1 || label[0] != expected)
        throw std::runtime_error("JASPAR record " + id + ": expected row '" + expected +
                                 "', got '" + label + "'");
    std::string tok;
    std::vector<double> vals;
    while (in >> tok) {
        if (tok == "[" || tok == "]") continue;
        // tolerate counts glued to brackets, e.g. "[12"
        if (tok.front() == '[') tok.erase(tok.begin());
        if (!tok.empty() && tok.back() == ']') tok.pop_back();
        if (tok.empty()) continue;
        size_t used = 0;
        double v = 0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw std::runtime_error("JASPAR record " + id + ": bad count '" + tok + "'");
        }
        if (used != tok.size())
            throw std::runtime_error("JASPAR record " + id + ": bad count '" + tok + "'");
        if (v < 0) throw std::runtime_error("JASPAR record " + id + ": negative count");
        vals.push_back(v);
    }
    if (vals.empty()) throw std::runtime_error("JASPAR record " + id + ": empty count row");
    return vals;
}

}  // namespace

Vocabulary parse_jaspar(const std::string& text, double pseudocount) {
    Vocabulary out;
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        lines.push_back(line);
    }
    size_t i = 0;
    while (i < lines.size()) {
        if (lines[i][0] != '>')
            throw std::runtime_error("JASPAR: expected '>' header, got: " + lines[i]);
        std::istringstream hdr(lines[i].substr(1));
        std::string id, name;
        hdr >> id;
        hdr >> name;
        if (id.empty()) throw std::runtime_error("JASPAR: malformed header: " + lines[i]);
        if (name.empty()) name = id;
        ++i;
        if (i + 4 > lines.size())
            throw std::runtime_error("JASPAR record " + id + ": truncated record");
        std::array<std::vector<double>, 4> rows;
        for (int b = 0; b < 4; ++b) rows[b] = parse_jaspar_row(lines[i + b], kBases[b], id);
        i += 4;
        const size_t len = rows[0].size();
        for (int b = 1; b < 4; ++b)
            if (rows[b].size() != len)
                throw std::runtime_error("JASPAR record " + id + ": row-length mismatch");
        std::vector<std::array<double, 4>> counts(len);
        for (size_t k = 0; k < len; ++k)
            for (int b = 0; b < 4; ++b) counts[k][b] = rows[b][k];
        out.emplace_back(id, name, std::move(counts), pseudocount);
    }
    return out;
}

std::string to_jaspar(const Vocabulary& vocab) {
    std::string out;
    for (const auto& pfm : vocab) {
        out += ">" + pfm.id() + " " + pfm.name() + "\n";
        for (int b = 0; b < 4; ++b) {
            out += kBases[b];
            out += " [";
            for (int k = 0; k < pfm.length(); ++k) out += " " + io::fmt_g17(pfm.counts()[k][b]);
            out += " ]\n";
        }
    }
    return out;
}

double window_log_score(std::string_view window, const PositionFrequencyMatrix& pfm) {
    if (static_cast<int>(window.size()) != pfm.length())
        throw std::invalid_argument("window length " + std::to_string(window.size()) +
                                    " != motif length " + std::to_string(pfm.length()));
    double s = 0.0;
    const auto& lp = pfm.log_probs();
    for (int k = 0; k < pfm.length(); ++k) s += lp[k][base_index(window[k])];
    return s;
}

double window_log_odds(std::string_view window, const PositionFrequencyMatrix& pfm) {
    return window_log_score(window, pfm) -
           static_cast<double>(pfm.length()) * std::log(0.25);
}

namespace {

// Scores windows ending at `end` (1-based) on both strands and appends any
// hits. Scores come from precomputed log-prob tables so the rollout hot path
// does no allocation beyond the output vector.
void check_windows_at(std::string_view seq, int end, const PositionFrequencyMatrix& pfm,
                      const ScanConfig& cfg, std::vector<MotifHit>& out) {
    const int len = pfm.length();
    if (end < len) return;
    const char* w = seq.data() + (end - len);
    const auto& lp = pfm.log_probs();
    const auto& rc = pfm.rc_log_probs();
    double fwd = 0.0, rev = 0.0;
    for (int k = 0; k < len; ++k) {
        const int b = base_index(w[k]);
        fwd += lp[k][b];
        rev += rc[k][b];
    }
    double fwd_score = fwd, rev_score = rev, threshold = 0.0;
    if (cfg.score == ScoreKind::probability) {
        // probability product >= fraction * max product
        threshold = pfm.max_log_score() + std::log(cfg.threshold_fraction);
    } else {
        const double lo_shift = -static_cast<double>(len) * std::log(0.25);
        fwd_score = fwd + lo_shift;
        rev_score = rev + lo_shift;
        threshold = cfg.threshold_fraction * pfm.max_log_odds();
    }
    if (fwd_score >= threshold)
        out.push_back({pfm.id(), end, Strand::forward, fwd_score});
    if (rev_score >= threshold)
        out.push_back({pfm.id(), end, Strand::reverse, rev_score});
}

void sort_hits(std::vector<MotifHit>& hits) {
    std::sort(hits.begin(), hits.end(), [](const MotifHit& a, const MotifHit& b) {
        if (a.end_position != b.end_position) return a.end_position < b.end_position;
        if (a.motif_id != b.motif_id) return a.motif_id < b.motif_id;
        return static_cast<int>(a.strand) < static_cast<int>(b.strand);
    });
}

}  // namespace

std::vector<MotifHit> scan(std::string_view seq, const Vocabulary& vocab, const ScanConfig& cfg) {
    if (vocab.empty()) throw std::invalid_argument("scan: empty vocabulary");
    if (cfg.threshold_fraction <= 0.0 || cfg.threshold_fraction > 1.0)
        throw std::invalid_argument("scan: threshold_fraction must be in (0,1]");
    std::vector<MotifHit> hits;
    const int L = static_cast<int>(seq.size());
    for (const auto& pfm : vocab)
        for (int end = pfm.length(); end <= L; ++end) check_windows_at(seq, end, pfm, cfg, hits);
    sort_hits(hits);
    return hits;
}

std::vector<MotifHit> incremental_hits(std::string_view prefix, const Vocabulary& vocab,
                                       const ScanConfig& cfg) {
    if (vocab.empty()) throw std::invalid_argument("incremental_hits: empty vocabulary");
    std::vector<MotifHit> hits;
    const int end = static_cast<int>(prefix.size());
    for (const auto& pfm : vocab) check_windows_at(prefix, end, pfm, cfg, hits);
    sort_hits(hits);
    return hits;
}

std::vector<int> extract_features(std::string_view seq, const Vocabulary& vocab,
                                  const ScanConfig& cfg) {
    std::vector<int> counts(vocab.size(), 0);
    if (cfg.threshold_fraction <= 0.0 || cfg.threshold_fraction > 1.0)
        throw std::invalid_argument("extract_features: threshold_fraction must be in (0,1]");
    const int L = static_cast<int>(seq.size());
    std::vector<MotifHit> hits;
    for (size_t i = 0; i < vocab.size(); ++i) {
        hits.clear();
        for (int end = vocab[i].length(); end <= L; ++end)
            check_windows_at(seq, end, vocab[i], cfg, hits);
        counts[i] = static_cast<int>(hits.size());
    }
    return counts;
}

std::string hits_to_csv(const std::vector<MotifHit>& hits) {
    std::string out = "motif_id,end,strand,log_score\n";
    for (const auto& h : hits) {
        out += h.motif_id + "," + std::to_string(h.end_position) + "," + strand_name(h.strand) +
               "," + io::fmt_g17(h.log_score) + "\n";
    }
    return out;
}

}  // namespace credo::motifs
