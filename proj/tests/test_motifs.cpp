#include <doctest.h>

#include <cmath>
#include <set>
#include <tuple>

#include "credo/landscape.hpp"
#include "credo/motifs.hpp"
#include "helpers.hpp"

using namespace credo;
using namespace credo::motifs;

namespace {

// Independent brute-force scan: re-scores every window position-by-position
// from the probability matrix, without the production scoring tables.
std::vector<MotifHit> brute_scan(const std::string& seq, const Vocabulary& vocab,
                                 const ScanConfig& cfg) {
    std::vector<MotifHit> hits;
    for (const auto& pfm : vocab) {
        const int len = pfm.length();
        double max_log = 0.0;
        for (int k = 0; k < len; ++k) {
            double best = 0.0;
            for (int b = 0; b < 4; ++b) best = std::max(best, pfm.probs()[k][b]);
            max_log += std::log(best);
        }
        for (int end = len; end <= static_cast<int>(seq.size()); ++end) {
            const std::string window = seq.substr(static_cast<size_t>(end - len), static_cast<size_t>(len));
            for (Strand strand : {Strand::forward, Strand::reverse}) {
                const std::string scored_window =
                    strand == Strand::forward ? window : reverse_complement(window);
                double s = 0.0;
                for (int k = 0; k < len; ++k)
                    s += std::log(pfm.probs()[k][base_index(scored_window[static_cast<size_t>(k)])]);
                bool hit;
                double report;
                if (cfg.score == ScoreKind::probability) {
                    hit = s >= max_log + std::log(cfg.threshold_fraction);
                    report = s;
                } else {
                    const double lo = s - len * std::log(0.25);
                    const double max_lo = max_log - len * std::log(0.25);
                    hit = lo >= cfg.threshold_fraction * max_lo;
                    report = lo;
                }
                if (hit) hits.push_back({pfm.id(), end, strand, report});
            }
        }
    }
    return hits;
}

std::set<std::tuple<std::string, int, int>> hit_keys(const std::vector<MotifHit>& hits) {
    std::set<std::tuple<std::string, int, int>> keys;
    for (const auto& h : hits) keys.insert({h.motif_id, h.end_position, static_cast<int>(h.strand)});
    return keys;
}

const char* kJasparSample =
    ">MA0001.1 TEST1\n"
    "A [ 10  2  0  0  5 ]\n"
    "C [  0  8  1  0  5 ]\n"
    "G [  2  0 11  0  1 ]\n"
    "T [  0  2  0 12  1 ]\n"
    ">MA0002.1 TEST2\n"
    "A [ 1 0 0 9 ]\n"
    "C [ 3 0 12 0 ]\n"
    "G [ 0 11 0 0 ]\n"
    "T [ 8 1 0 3 ]\n";

}  // namespace

TEST_CASE("parse_jaspar transcribes counts into L x 4 layout") {
    const auto vocab = parse_jaspar(kJasparSample);
    REQUIRE(vocab.size() == 2);
    CHECK(vocab[0].id() == "MA0001.1");
    CHECK(vocab[0].name() == "TEST1");
    CHECK(vocab[0].length() == 5);
    // column k of file row A lands at counts[k][0]
    CHECK(vocab[0].counts()[0][0] == 10);
    CHECK(vocab[0].counts()[1][1] == 8);
    CHECK(vocab[0].counts()[2][2] == 11);
    CHECK(vocab[0].counts()[3][3] == 12);
    CHECK(vocab[1].length() == 4);
    CHECK(vocab[1].counts()[0][3] == 8);

    // derived rows normalize to 1
    for (const auto& pfm : vocab) {
        for (int k = 0; k < pfm.length(); ++k) {
            double s = 0;
            for (int b = 0; b < 4; ++b) s += pfm.probs()[k][b];
            CHECK(std::abs(s - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("parse_jaspar edge and error cases") {
    CHECK(parse_jaspar("").empty());
    CHECK(parse_jaspar("\n  \n").empty());

    // row-length mismatch: T shorter than the others
    const char* mismatch =
        ">M1 X\nA [ 1 1 1 1 ]\nC [ 1 1 1 1 ]\nG [ 1 1 1 1 ]\nT [ 1 1 1 ]\n";
    CHECK_THROWS_WITH_AS(parse_jaspar(mismatch), doctest::Contains("row-length mismatch"),
                         std::runtime_error);

    CHECK_THROWS_AS(parse_jaspar("no header\n"), std::runtime_error);
    CHECK_THROWS_AS(parse_jaspar(">M1 X\nA [ 1 ]\nC [ 1 ]\nG [ -1 ]\nT [ 1 ]\n"),
                    std::runtime_error);
    // unknown nucleotide row label
    CHECK_THROWS_AS(parse_jaspar(">M1 X\nA [ 1 ]\nC [ 1 ]\nX [ 1 ]\nT [ 1 ]\n"),
                    std::runtime_error);
    // truncated record
    CHECK_THROWS_AS(parse_jaspar(">M1 X\nA [ 1 ]\nC [ 1 ]\n"), std::runtime_error);
}

TEST_CASE("jaspar round trip preserves matrices") {
    const auto vocab = parse_jaspar(kJasparSample);
    const auto again = parse_jaspar(to_jaspar(vocab));
    REQUIRE(again.size() == vocab.size());
    for (size_t i = 0; i < vocab.size(); ++i) {
        CHECK(again[i].id() == vocab[i].id());
        CHECK(again[i].counts() == vocab[i].counts());
    }
}

TEST_CASE("window_log_score certainty and uniform cases") {
    // deterministic matrix, pseudocount 0: consensus scores ln(1) = 0
    const auto det = testutil::consensus_pfm("DET", "ACGT", 7.0, 0.0);
    CHECK(window_log_score("ACGT", det) == doctest::Approx(0.0).epsilon(1e-15));

    // uniform matrix: any window scores L * ln(0.25)
    std::vector<std::array<double, 4>> uni(6, {1, 1, 1, 1});
    const PositionFrequencyMatrix upfm("UNI", "UNI", uni, 0.0);
    CHECK(window_log_score("ACGTAC", upfm) == doctest::Approx(6 * std::log(0.25)));

    CHECK_THROWS_AS(window_log_score("ACG", det), std::invalid_argument);
}

TEST_CASE("window_log_score equals position-by-position product oracle") {
    const auto vocab = parse_jaspar(kJasparSample);
    Rng rng(41);
    for (int trial = 0; trial < 50; ++trial) {
        for (const auto& pfm : vocab) {
            const std::string w = testutil::random_sequence(rng, pfm.length());
            double expected = 1.0;
            for (int k = 0; k < pfm.length(); ++k)
                expected *= pfm.probs()[static_cast<size_t>(k)][static_cast<size_t>(base_index(w[static_cast<size_t>(k)]))];
            CHECK(window_log_score(w, pfm) == doctest::Approx(std::log(expected)).epsilon(1e-12));
        }
    }
}

TEST_CASE("score additivity over concatenated motif parts") {
    const auto left = testutil::consensus_pfm("L", "ACGTT");
    const auto right = testutil::consensus_pfm("R", "GGA");
    std::vector<std::array<double, 4>> combined = left.counts();
    for (const auto& row : right.counts()) combined.push_back(row);
    const PositionFrequencyMatrix both("LR", "LR", combined, 0.1);
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const std::string wl = testutil::random_sequence(rng, 5);
        const std::string wr = testutil::random_sequence(rng, 3);
        CHECK(window_log_score(wl + wr, both) ==
              doctest::Approx(window_log_score(wl, left) + window_log_score(wr, right))
                  .epsilon(1e-12));
    }
}

TEST_CASE("scan finds an embedded consensus exactly once") {
    const auto pfm = testutil::consensus_pfm("M1", "ACGTACGG");
    Vocabulary vocab{pfm};
    // fixed background with no accidental matches, consensus at positions 10..17
    std::string seq = "TTTTTTTTTT" + pfm.consensus() + "TTTTTTTTTT";
    const auto hits = scan(seq, vocab, {});
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].motif_id == "M1");
    CHECK(hits[0].end_position == 18);
    CHECK(hits[0].strand == Strand::forward);
    CHECK(hits[0].log_score == doctest::Approx(pfm.max_log_score()));
}

TEST_CASE("scan matches the exhaustive window enumeration oracle") {
    const auto vocab = parse_jaspar(kJasparSample);
    Rng rng(99);
    for (const double fraction : {0.7, 0.85, 1.0}) {
        ScanConfig cfg;
        cfg.threshold_fraction = fraction;
        for (int trial = 0; trial < 30; ++trial) {
            const std::string seq = testutil::random_sequence(rng, 60);
            const auto got = scan(seq, vocab, cfg);
            const auto expected = brute_scan(seq, vocab, cfg);
            CHECK(hit_keys(got) == hit_keys(expected));
        }
    }
    // log-odds mode agrees with its oracle too
    ScanConfig lo;
    lo.score = ScoreKind::log_odds;
    lo.threshold_fraction = 0.8;
    for (int trial = 0; trial < 30; ++trial) {
        const std::string seq = testutil::random_sequence(rng, 60);
        CHECK(hit_keys(scan(seq, vocab, lo)) == hit_keys(brute_scan(seq, vocab, lo)));
    }
}

TEST_CASE("motif longer than the sequence yields no hits") {
    Vocabulary vocab{testutil::consensus_pfm("LONG", "ACGTACGTACGT")};
    CHECK(scan("ACGT", vocab, {}).empty());
}

TEST_CASE("palindromic consensus hits on both strands with equal score") {
    // ACGCGT reverse-complements to itself
    const std::string pal = "ACGCGT";
    REQUIRE(reverse_complement(pal) == pal);
    Vocabulary vocab{testutil::consensus_pfm("PAL", pal)};
    const std::string seq = "TTTTT" + pal + "TTTTT";
    const auto hits = scan(seq, vocab, {});
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].end_position == hits[1].end_position);
    CHECK(hits[0].strand != hits[1].strand);
    CHECK(hits[0].log_score == doctest::Approx(hits[1].log_score).epsilon(1e-12));
}

TEST_CASE("reverse-complement duality mirrors hits") {
    const auto vocab = parse_jaspar(kJasparSample);
    Rng rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        const std::string seq = testutil::random_sequence(rng, 50);
        const int L = static_cast<int>(seq.size());
        const auto fwd = scan(seq, vocab, {});
        const auto rev = scan(reverse_complement(seq), vocab, {});
        std::set<std::tuple<std::string, int, int>> mirrored;
        for (const auto& h : fwd) {
            int len = 0;
            for (const auto& pfm : vocab)
                if (pfm.id() == h.motif_id) len = pfm.length();
            mirrored.insert({h.motif_id, L - h.end_position + len,
                             h.strand == Strand::forward ? 1 : 0});
        }
        CHECK(mirrored == hit_keys(rev));
    }
}

TEST_CASE("raising the threshold never adds hits") {
    const auto vocab = parse_jaspar(kJasparSample);
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const std::string seq = testutil::random_sequence(rng, 60);
        ScanConfig lo_cfg, hi_cfg;
        lo_cfg.threshold_fraction = 0.6;
        hi_cfg.threshold_fraction = 0.9;
        const auto lo_hits = hit_keys(scan(seq, vocab, lo_cfg));
        const auto hi_hits = hit_keys(scan(seq, vocab, hi_cfg));
        for (const auto& k : hi_hits) CHECK(lo_hits.count(k) == 1);
    }
}

TEST_CASE("incremental hits union equals the full scan") {
    const auto vocab = landscape::make_vocabulary(6, 5, 8, 2024);
    Rng rng(55);
    for (int trial = 0; trial < 50; ++trial) {
        const std::string seq = testutil::random_sequence(rng, 40);
        std::vector<MotifHit> collected;
        for (size_t i = 1; i <= seq.size(); ++i) {
            const auto step = incremental_hits(std::string_view(seq).substr(0, i), vocab, {});
            for (const auto& h : step) {
                CHECK(h.end_position == static_cast<int>(i));
                collected.push_back(h);
            }
        }
        CHECK(hit_keys(collected) == hit_keys(scan(seq, vocab, {})));
    }
}

TEST_CASE("incremental hits below the shortest motif are empty") {
    const auto vocab = landscape::make_vocabulary(4, 6, 8, 3);
    CHECK(incremental_hits("ACG", vocab, {}).empty());
}

TEST_CASE("appending the final base of an embedded consensus completes a hit") {
    const auto pfm = testutil::consensus_pfm("M1", "ACGTTGCA");
    Vocabulary vocab{pfm};
    const std::string prefix = std::string("GG") + pfm.consensus();
    const auto hits = incremental_hits(prefix, vocab, {});
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].motif_id == "M1");
    CHECK(hits[0].end_position == static_cast<int>(prefix.size()));
}

TEST_CASE("extract_features counts embedded copies") {
    const auto m1 = testutil::consensus_pfm("M1", "ACGTACGG");
    const auto m2 = testutil::consensus_pfm("M2", "GGATCCAT");
    Vocabulary vocab{m1, m2};
    const std::string seq =
        "TTTT" + m2.consensus() + "TTTTTT" + m2.consensus() + std::string(10, 'T');
    const auto counts = extract_features(seq, vocab, {});
    REQUIRE(counts.size() == 2);
    CHECK(counts[0] == 0);
    CHECK(counts[1] == 2);

    // all-A sequence against zero-A-affinity motifs
    Vocabulary no_a{testutil::consensus_pfm("NC", "CCGGCC"), testutil::consensus_pfm("NT", "GGTTGG")};
    const auto zero = extract_features(std::string(30, 'A'), no_a, {});
    CHECK(zero == std::vector<int>{0, 0});
}

TEST_CASE("feature sums across a dataset equal column sums") {
    const auto vocab = landscape::make_vocabulary(5, 5, 7, 11);
    Rng rng(31);
    std::vector<int> totals(vocab.size(), 0);
    std::vector<std::vector<int>> rows;
    for (int i = 0; i < 20; ++i) {
        const auto feats = extract_features(testutil::random_sequence(rng, 30), vocab, {});
        rows.push_back(feats);
        for (size_t f = 0; f < feats.size(); ++f) totals[f] += feats[f];
    }
    for (size_t f = 0; f < vocab.size(); ++f) {
        int col = 0;
        for (const auto& r : rows) col += r[f];
        CHECK(col == totals[f]);
    }
}

TEST_CASE("scan is deterministic and ordered") {
    const auto vocab = parse_jaspar(kJasparSample);
    Rng rng(3);
    // embed both consensus sequences so the hit list is non-trivial
    std::string seq = testutil::random_sequence(rng, 80);
    seq.replace(10, static_cast<size_t>(vocab[0].length()), vocab[0].consensus());
    seq.replace(40, static_cast<size_t>(vocab[1].length()), vocab[1].consensus());
    ScanConfig cfg;
    cfg.threshold_fraction = 0.5;
    const auto a = scan(seq, vocab, cfg);
    const auto b = scan(seq, vocab, cfg);
    REQUIRE(!a.empty());
    CHECK(a == b);
    for (size_t i = 1; i < a.size(); ++i) {
        const auto key = [](const MotifHit& h) {
            return std::make_tuple(h.end_position, h.motif_id, static_cast<int>(h.strand));
        };
        CHECK(key(a[i - 1]) < key(a[i]));
    }
}

TEST_CASE("hits export as CSV") {
    Vocabulary vocab{testutil::consensus_pfm("M1", "ACGTACGG")};
    const std::string seq = "TT" + vocab[0].consensus() + "TT";
    const std::string csv = hits_to_csv(scan(seq, vocab, {}));
    CHECK(csv.find("motif_id,end,strand,log_score\n") == 0);
    CHECK(csv.find("M1,10,+,") != std::string::npos);
}

TEST_CASE("sequence validation rejects bad symbols") {
    CHECK_THROWS_AS(validate_sequence("ACGU"), std::invalid_argument);
    CHECK_THROWS_AS(validate_sequence(""), std::invalid_argument);
    CHECK_NOTHROW(validate_sequence("ACGT"));
    CHECK(reverse_complement("AACGT") == "ACGTT");
}
