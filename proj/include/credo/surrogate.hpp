#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace credo::surrogate {

enum class Loss { mae, rmse };

struct Config {
    int rounds = 200;
    int max_leaves = 63;
    double learning_rate = 0.05;
    double feature_fraction = 0.7;
    Loss loss = Loss::mae;
    int min_samples_leaf = 5;
    uint64_t seed = 42;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double predict(std::span<const double> x) const;
    int leaf_count() const;
};

// Gradient-boosted regression trees grown leaf-wise (best-first) with an
// exact split search over sorted feature values.
//   prediction(x) = base_prediction + learning_rate * sum_m tree_m(x)
struct GBDTModel {
    double base_prediction = 0.0;
    double learning_rate = 0.05;
    Loss loss = Loss::mae;
    int num_features = 0;
    std::vector<RegressionTree> trees;

    double predict(std::span<const double> x) const;
};

using Matrix = std::vector<std::vector<double>>;

// MAE mode fits each tree to sign gradients with median-residual leaf values;
// RMSE mode fits residuals with mean leaf values. Feature subsampling is per
// tree. Deterministic given the seed.
GBDTModel fit(const Matrix& features, const std::vector<double>& targets, const Config& config);

struct EvalStats {
    double pearson = 0.0;
    double mae = 0.0;
    double rmse = 0.0;
};

EvalStats evaluate(const GBDTModel& model, const Matrix& features,
                   const std::vector<double>& targets);

nlohmann::json model_to_json(const GBDTModel& model);
GBDTModel model_from_json(const nlohmann::json& j);

// Plain numeric CSV with an f0..f{n-1} header row.
std::string features_to_csv(const Matrix& features);
Matrix features_from_csv(const std::string& text);

}  // namespace credo::surrogate
