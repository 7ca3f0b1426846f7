#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace credo::motifs {

inline constexpr char kBases[4] = {'A', 'C', 'G', 'T'};

// Index in {0..3} for A,C,G,T; throws std::invalid_argument otherwise.
int base_index(char c);
char complement(char c);
std::string reverse_complement(std::string_view seq);
void validate_sequence(std::string_view seq);

enum class Strand { forward, reverse };
inline const char* strand_name(Strand s) { return s == Strand::forward ? "+" : "-"; }

struct MotifHit {
    std::string motif_id;
    int end_position = 0;  // 1-based index of the last covered base
    Strand strand = Strand::forward;
    double log_score = 0.0;

    friend bool operator==(const MotifHit&, const MotifHit&) = default;
};

// Motif count matrix plus its derived probability form. Rows are positions,
// columns A,C,G,T. Probabilities are (counts + pseudocount) row-normalized.
class PositionFrequencyMatrix {
public:
    PositionFrequencyMatrix(std::string motif_id, std::string name,
                            std::vector<std::array<double, 4>> counts,
                            double pseudocount = 0.1);

    const std::string& id() const { return id_; }
    const std::string& name() const { return name_; }
    int length() const { return static_cast<int>(counts_.size()); }
    double pseudocount() const { return pseudocount_; }
    const std::vector<std::array<double, 4>>& counts() const { return counts_; }
    const std::vector<std::array<double, 4>>& probs() const { return probs_; }
    const std::vector<std::array<double, 4>>& log_probs() const { return log_probs_; }
    // log_probs in reverse-complement orientation; scoring a window with this
    // matrix equals scoring the window's reverse complement with log_probs().
    const std::vector<std::array<double, 4>>& rc_log_probs() const { return rc_log_probs_; }

    // Sum over positions of ln(max row probability): the best achievable
    // probability log-score.
    double max_log_score() const { return max_log_score_; }
    // Best achievable log-odds score vs a uniform background.
    double max_log_odds() const { return max_log_odds_; }

    std::string consensus() const;

private:
    std::string id_;
    std::string name_;
    std::vector<std::array<double, 4>> counts_;
    double pseudocount_ = 0.1;
    std::vector<std::array<double, 4>> probs_;
    std::vector<std::array<double, 4>> log_probs_;
    std::vector<std::array<double, 4>> rc_log_probs_;
    double max_log_score_ = 0.0;
    double max_log_odds_ = 0.0;
};

using Vocabulary = std::vector<PositionFrequencyMatrix>;

// JASPAR 2020 PFM text: ">ID NAME" header, then four rows
// "A [ c1 c2 ... ]" in A,C,G,T order. Parse is atomic: any malformed record
// throws and nothing is returned.
Vocabulary parse_jaspar(const std::string& text, double pseudocount = 0.1);
std::string to_jaspar(const Vocabulary& vocab);

enum class ScoreKind {
    probability,  // product of position probabilities, in log space
    log_odds,     // same vs a uniform 0.25 background
};

struct ScanConfig {
    double threshold_fraction = 0.85;
    ScoreKind score = ScoreKind::probability;
};

// ln of the probability product of `window` under the matrix (window length
// must equal the motif length).
double window_log_score(std::string_view window, const PositionFrequencyMatrix& pfm);
double window_log_odds(std::string_view window, const PositionFrequencyMatrix& pfm);

// All hits over both strands, sorted by (end_position, motif_id, strand).
// A window is a hit when its score reaches threshold_fraction of the motif's
// maximum achievable score: probability mode compares the probability product
// against fraction * max product (log_score >= max_log_score + ln fraction);
// log-odds mode compares against fraction * max_log_odds.
std::vector<MotifHit> scan(std::string_view seq, const Vocabulary& vocab,
                           const ScanConfig& cfg = {});

// Hits of scan(prefix) whose end_position equals the prefix length; only the
// windows ending at the last base are examined, so cost is O(sum of motif
// lengths) per call.
std::vector<MotifHit> incremental_hits(std::string_view prefix, const Vocabulary& vocab,
                                       const ScanConfig& cfg = {});

// Per-motif accepted hit counts (both strands, all end positions), aligned
// with the vocabulary order.
std::vector<int> extract_features(std::string_view seq, const Vocabulary& vocab,
                                  const ScanConfig& cfg = {});

std::string hits_to_csv(const std::vector<MotifHit>& hits);

}  // namespace credo::motifs
