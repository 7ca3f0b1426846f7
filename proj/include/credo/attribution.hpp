#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace credo::attribution {

// Attribution is model-agnostic: anything mapping a feature vector to a
// scalar prediction can be explained.
using PredictFn = std::function<double(const std::vector<double>&)>;
using Matrix = std::vector<std::vector<double>>;

struct ShapExplanation {
    std::vector<double> phi;          // per-feature Shapley values
    std::vector<double> stderrs;      // per-feature standard errors (sampled mode only)
    double base_value = 0.0;          // v(empty) = mean prediction over background
    double prediction = 0.0;          // v(full)  = prediction at x
};

// Interventional value function: mean over background rows of the prediction
// on composites that take x on features in `subset` and the background row
// elsewhere.
double value_function(const PredictFn& model, const std::vector<double>& x,
                      const std::vector<int>& subset, const Matrix& background);

// Exact Shapley values by subset enumeration (n <= 16). Internally each
// background row forms a two-point game over only the features where x and
// the row differ; features equal in both are null players and drop out, so
// the enumeration is over the differing set rather than all n features.
ShapExplanation exact_shapley(const PredictFn& model, const std::vector<double>& x,
                              const Matrix& background);

// Castro-style permutation estimator with one background row drawn per
// permutation; unbiased for the interventional value above and reports
// per-feature standard errors.
ShapExplanation sampled_shapley(const PredictFn& model, const std::vector<double>& x,
                                const Matrix& background, int permutations, uint64_t seed);

enum class Role { activator, repressor, neutral };
const char* role_name(Role role);
Role role_from_name(const std::string& name);

struct RoleEntry {
    std::string motif_id;
    double mean_shap = 0.0;
    double p_value = 1.0;
    Role role = Role::neutral;
    double reward = 0.0;
};

struct RoleTable {
    std::vector<RoleEntry> entries;
    double alpha = 0.01;

    const RoleEntry* find(const std::string& motif_id) const;
};

enum class ShapMode { exact, sampled };

struct RoleTableOptions {
    double alpha = 0.01;
    ShapMode mode = ShapMode::exact;
    int permutations = 2000;
    uint64_t seed = 5;
};

// Mean SHAP per motif over the explained sample with a two-sided z-test
// against zero; the reward is alpha * mean when p < 0.05 and exactly 0
// otherwise. Requires at least 30 explained rows.
RoleTable build_role_table(const PredictFn& model, const Matrix& sample, const Matrix& background,
                           const std::vector<std::string>& motif_ids,
                           const RoleTableOptions& options);

std::string role_table_to_csv(const RoleTable& table);
RoleTable role_table_from_csv(const std::string& text);

// Cross-condition role comparison: per-role membership and exclusive Venn
// region cardinalities over >= 2 tables sharing one vocabulary.
struct VennRegion {
    Role role;
    std::vector<std::string> conditions;  // the exact set of conditions
    std::vector<std::string> motifs;
};

struct RoleComparison {
    std::vector<std::string> condition_names;
    std::vector<VennRegion> regions;  // only non-empty exclusive regions
};

RoleComparison compare_roles(const std::vector<RoleTable>& tables,
                             const std::vector<std::string>& condition_names);
std::string comparison_to_csv(const RoleComparison& cmp);

}  // namespace credo::attribution
