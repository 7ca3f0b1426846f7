#include "credo/attribution.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "credo/rng.hpp"

namespace credo::attribution {

namespace {

void check_background(const std::vector<double>& x, const Matrix& background) {
    if (background.empty()) throw std::invalid_argument("attribution: empty background");
    for (const auto& row : background)
        if (row.size() != x.size())
            throw std::invalid_argument("attribution: background width mismatch");
}

// weights[s] = s! (m-s-1)! / m!  for a game over m players
std::vector<double> shapley_weights(int m) {
    std::vector<double> fact(static_cast<size_t>(m) + 1, 1.0);
    for (int i = 1; i <= m; ++i) fact[static_cast<size_t>(i)] = fact[static_cast<size_t>(i - 1)] * i;
    std::vector<double> w(static_cast<size_t>(m));
    for (int s = 0; s < m; ++s)
        w[static_cast<size_t>(s)] = fact[static_cast<size_t>(s)] * fact[static_cast<size_t>(m - s - 1)] / fact[static_cast<size_t>(m)];
    return w;
}

}  // namespace

double value_function(const PredictFn& model, const std::vector<double>& x,
                      const std::vector<int>& subset, const Matrix& background) {
    check_background(x, background);
    for (int i : subset)
        if (i < 0 || i >= static_cast<int>(x.size()))
            throw std::invalid_argument("value_function: subset index out of range");
    double total = 0.0;
    std::vector<double> composite;
    for (const auto& row : background) {
        composite = row;
        for (int i : subset) composite[static_cast<size_t>(i)] = x[static_cast<size_t>(i)];
        total += model(composite);
    }
    return total / static_cast<double>(background.size());
}

ShapExplanation exact_shapley(const PredictFn& model, const std::vector<double>& x,
                              const Matrix& background) {
    check_background(x, background);
    const int n = static_cast<int>(x.size());
    if (n > 16)
        throw std::invalid_argument("exact_shapley: n = " + std::to_string(n) +
                                    " too large for exact mode (max 16)");

    ShapExplanation out;
    out.phi.assign(x.size(), 0.0);
    out.prediction = model(x);

    std::vector<double> values;        // v over subsets of the differing set
    std::vector<int> diff;             // feature indices where x differs from the row
    std::vector<double> composite;
    double base_total = 0.0;

    for (const auto& row : background) {
        base_total += model(row);
        diff.clear();
        for (int i = 0; i < n; ++i)
            if (x[static_cast<size_t>(i)] != row[static_cast<size_t>(i)]) diff.push_back(i);
        const int m = static_cast<int>(diff.size());
        if (m == 0) continue;  // every feature is a null player in this game

        values.assign(size_t{1} << m, 0.0);
        for (uint32_t mask = 0; mask < (uint32_t{1} << m); ++mask) {
            composite = row;
            for (int j = 0; j < m; ++j)
                if (mask & (uint32_t{1} << j))
                    composite[static_cast<size_t>(diff[static_cast<size_t>(j)])] =
                        x[static_cast<size_t>(diff[static_cast<size_t>(j)])];
            values[mask] = model(composite);
        }

        const auto weights = shapley_weights(m);
        for (int j = 0; j < m; ++j) {
            const uint32_t bit = uint32_t{1} << j;
            double phi = 0.0;
            for (uint32_t mask = 0; mask < (uint32_t{1} << m); ++mask) {
                if (mask & bit) continue;
                const int s = std::popcount(mask);
                phi += weights[static_cast<size_t>(s)] * (values[mask | bit] - values[mask]);
            }
            out.phi[static_cast<size_t>(diff[static_cast<size_t>(j)])] += phi;
        }
    }

    const double scale = 1.0 / static_cast<double>(background.size());
    for (auto& p : out.phi) p *= scale;
    out.base_value = base_total * scale;
    return out;
}

ShapExplanation sampled_shapley(const PredictFn& model, const std::vector<double>& x,
                                const Matrix& background, int permutations, uint64_t seed) {
    check_background(x, background);
    if (permutations < 1) throw std::invalid_argument("sampled_shapley: permutations must be >= 1");
    const int n = static_cast<int>(x.size());

    Rng rng(mix_seed(seed, 0x5a37ULL));
    std::vector<int> order(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;

    // Welford accumulators per feature
    std::vector<double> mean(x.size(), 0.0), m2(x.size(), 0.0);
    std::vector<double> composite;
    for (int p = 0; p < permutations; ++p) {
        const auto& row = background[rng.next_below(static_cast<uint32_t>(background.size()))];
        rng.shuffle(order);
        composite = row;
        double prev = model(composite);
        for (int j = 0; j < n; ++j) {
            const int feat = order[static_cast<size_t>(j)];
            composite[static_cast<size_t>(feat)] = x[static_cast<size_t>(feat)];
            const double cur = model(composite);
            const double marginal = cur - prev;
            prev = cur;
            const double delta = marginal - mean[static_cast<size_t>(feat)];
            mean[static_cast<size_t>(feat)] += delta / static_cast<double>(p + 1);
            m2[static_cast<size_t>(feat)] += delta * (marginal - mean[static_cast<size_t>(feat)]);
        }
    }

    ShapExplanation out;
    out.phi = mean;
    out.stderrs.assign(x.size(), 0.0);
    if (permutations > 1) {
        for (size_t i = 0; i < x.size(); ++i) {
            const double var = m2[i] / static_cast<double>(permutations - 1);
            out.stderrs[i] = std::sqrt(var / static_cast<double>(permutations));
        }
    }
    double base_total = 0.0;
    for (const auto& row : background) base_total += model(row);
    out.base_value = base_total / static_cast<double>(background.size());
    out.prediction = model(x);
    return out;
}

const char* role_name(Role role) {
    switch (role) {
        case Role::activator: return "activator";
        case Role::repressor: return "repressor";
        case Role::neutral: return "neutral";
    }
    return "neutral";
}

Role role_from_name(const std::string& name) {
    if (name == "activator") return Role::activator;
    if (name == "repressor") return Role::repressor;
    if (name == "neutral") return Role::neutral;
    throw std::invalid_argument("unknown role: " + name);
}

const RoleEntry* RoleTable::find(const std::string& motif_id) const {
    for (const auto& e : entries)
        if (e.motif_id == motif_id) return &e;
    return nullptr;
}

namespace {

// two-sided normal tail probability for a z statistic
double two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

}  // namespace

RoleTable build_role_table(const PredictFn& model, const Matrix& sample, const Matrix& background,
                           const std::vector<std::string>& motif_ids,
                           const RoleTableOptions& options) {
    const size_t m = sample.size();
    if (m < 30)
        throw std::invalid_argument("build_role_table: need at least 30 explained rows, got " +
                                    std::to_string(m));
    for (const auto& row : sample)
        if (row.size() != motif_ids.size())
            throw std::invalid_argument("build_role_table: sample width mismatch");

    // per-instance Shapley values, features in vocabulary order
    Matrix phis(m);
    for (size_t i = 0; i < m; ++i) {
        const ShapExplanation ex =
            options.mode == ShapMode::exact
                ? exact_shapley(model, sample[i], background)
                : sampled_shapley(model, sample[i], background, options.permutations,
                                  mix_seed(options.seed, i));
        phis[i] = ex.phi;
    }

    RoleTable table;
    table.alpha = options.alpha;
    for (size_t f = 0; f < motif_ids.size(); ++f) {
        double mean = 0.0;
        for (size_t i = 0; i < m; ++i) mean += phis[i][f];
        mean /= static_cast<double>(m);
        double var = 0.0;
        for (size_t i = 0; i < m; ++i) {
            const double d = phis[i][f] - mean;
            var += d * d;
        }
        var /= static_cast<double>(m - 1);

        double p_value;
        if (var <= 0.0) {
            p_value = mean == 0.0 ? 1.0 : 0.0;
        } else {
            const double z = mean / std::sqrt(var / static_cast<double>(m));
            p_value = two_sided_p(z);
        }

        RoleEntry entry;
        entry.motif_id = motif_ids[f];
        entry.mean_shap = mean;
        entry.p_value = p_value;
        entry.reward = p_value < 0.05 ? options.alpha * mean : 0.0;
        entry.role = entry.reward > 0   ? Role::activator
                     : entry.reward < 0 ? Role::repressor
                                        : Role::neutral;
        table.entries.push_back(std::move(entry));
    }
    return table;
}

std::string role_table_to_csv(const RoleTable& table) {
    std::string out = "motif_id,mean_shap,p_value,role,reward\n";
    char buf[128];
    for (const auto& e : table.entries) {
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%s,%.17g\n", e.motif_id.c_str(),
                      e.mean_shap, e.p_value, role_name(e.role), e.reward);
        out += buf;
    }
    return out;
}

RoleTable role_table_from_csv(const std::string& text) {
    RoleTable table;
    bool first = true;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            if (line != "motif_id,mean_shap,p_value,role,reward")
                throw std::runtime_error("role table CSV: unexpected header: " + line);
            first = false;
            continue;
        }
        std::vector<std::string> fields;
        size_t start = 0;
        while (true) {
            const size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        if (fields.size() != 5) throw std::runtime_error("role table CSV: bad row: " + line);
        RoleEntry e;
        e.motif_id = fields[0];
        e.mean_shap = std::stod(fields[1]);
        e.p_value = std::stod(fields[2]);
        e.role = role_from_name(fields[3]);
        e.reward = std::stod(fields[4]);
        table.entries.push_back(std::move(e));
    }
    if (first) throw std::runtime_error("role table CSV: empty input");
    return table;
}

RoleComparison compare_roles(const std::vector<RoleTable>& tables,
                             const std::vector<std::string>& condition_names) {
    if (tables.size() < 2) throw std::invalid_argument("compare_roles: need at least 2 tables");
    if (condition_names.size() != tables.size())
        throw std::invalid_argument("compare_roles: condition names not aligned with tables");
    const size_t n = tables[0].entries.size();
    for (const auto& t : tables) {
        if (t.entries.size() != n)
            throw std::invalid_argument("compare_roles: vocabulary size mismatch");
        for (size_t i = 0; i < n; ++i)
            if (t.entries[i].motif_id != tables[0].entries[i].motif_id)
                throw std::invalid_argument("compare_roles: vocabulary id mismatch at index " +
                                            std::to_string(i));
    }

    RoleComparison cmp;
    cmp.condition_names = condition_names;
    const int c = static_cast<int>(tables.size());
    for (Role role : {Role::activator, Role::repressor, Role::neutral}) {
        // membership mask per motif, then group motifs by exact mask
        for (uint32_t mask = 1; mask < (uint32_t{1} << c); ++mask) {
            VennRegion region;
            region.role = role;
            for (int k = 0; k < c; ++k)
                if (mask & (uint32_t{1} << k)) region.conditions.push_back(condition_names[static_cast<size_t>(k)]);
            for (size_t i = 0; i < n; ++i) {
                uint32_t motif_mask = 0;
                for (int k = 0; k < c; ++k)
                    if (tables[static_cast<size_t>(k)].entries[i].role == role)
                        motif_mask |= uint32_t{1} << k;
                if (motif_mask == mask) region.motifs.push_back(tables[0].entries[i].motif_id);
            }
            if (!region.motifs.empty()) cmp.regions.push_back(std::move(region));
        }
    }
    return cmp;
}

std::string comparison_to_csv(const RoleComparison& cmp) {
    std::string out = "role,conditions,count,motifs\n";
    for (const auto& region : cmp.regions) {
        std::string conds, motifs;
        for (size_t i = 0; i < region.conditions.size(); ++i) {
            if (i) conds += '&';
            conds += region.conditions[i];
        }
        for (size_t i = 0; i < region.motifs.size(); ++i) {
            if (i) motifs += ';';
            motifs += region.motifs[i];
        }
        out += std::string(role_name(region.role)) + "," + conds + "," +
               std::to_string(region.motifs.size()) + "," + motifs + "\n";
    }
    return out;
}

}  // namespace credo::attribution
