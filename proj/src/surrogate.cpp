#include "credo/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "credo/rng.hpp"

namespace credo::surrogate {

double RegressionTree::predict(std::span<const double> x) const {
    int node = 0;
    while (!nodes[static_cast<size_t>(node)].is_leaf()) {
        const TreeNode& n = nodes[static_cast<size_t>(node)];
        node = x[static_cast<size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<size_t>(node)].value;
}

int RegressionTree::leaf_count() const {
    int c = 0;
    for (const auto& n : nodes) c += n.is_leaf() ? 1 : 0;
    return c;
}

double GBDTModel::predict(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != num_features)
        throw std::invalid_argument("predict: feature width " + std::to_string(x.size()) +
                                    " != training width " + std::to_string(num_features));
    double v = base_prediction;
    for (const auto& t : trees) v += learning_rate * t.predict(x);
    return v;
}

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty set");
    const size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid - 1),
                     v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (v[mid - 1] + hi);
}

struct SplitChoice {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
    bool valid() const { return feature >= 0; }
};

// Best variance-reduction split of the node's gradient values over the given
// feature subset. Thresholds fall between distinct sorted values; ties in
// gain resolve to the lower (feature, threshold).
SplitChoice best_split(const Matrix& X, const std::vector<double>& grad,
                       const std::vector<int>& samples, const std::vector<int>& feats,
                       int min_leaf) {
    SplitChoice best;
    const int m = static_cast<int>(samples.size());
    if (m < 2 * min_leaf) return best;

    double total = 0.0;
    for (int s : samples) total += grad[static_cast<size_t>(s)];
    const double parent_score = total * total / m;

    std::vector<std::pair<double, double>> vals;  // (feature value, gradient)
    vals.reserve(samples.size());
    for (int f : feats) {
        vals.clear();
        for (int s : samples)
            vals.emplace_back(X[static_cast<size_t>(s)][static_cast<size_t>(f)],
                              grad[static_cast<size_t>(s)]);
        std::sort(vals.begin(), vals.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        double left_sum = 0.0;
        for (int i = 0; i + 1 < m; ++i) {
            left_sum += vals[static_cast<size_t>(i)].second;
            if (vals[static_cast<size_t>(i)].first == vals[static_cast<size_t>(i + 1)].first) continue;
            const int nl = i + 1, nr = m - nl;
            if (nl < min_leaf || nr < min_leaf) continue;
            const double right_sum = total - left_sum;
            const double gain =
                left_sum * left_sum / nl + right_sum * right_sum / nr - parent_score;
            const double thr =
                0.5 * (vals[static_cast<size_t>(i)].first + vals[static_cast<size_t>(i + 1)].first);
            // features and thresholds are visited in ascending order, so strict
            // improvement keeps the lowest (feature, threshold) on exact ties
            if (gain > 1e-12 && (!best.valid() || gain > best.gain)) best = {gain, f, thr};
        }
    }
    return best;
}

struct BuildNode {
    std::vector<int> samples;
    SplitChoice split;
    int tree_index = -1;  // position in RegressionTree::nodes
};

RegressionTree grow_tree(const Matrix& X, const std::vector<double>& grad,
                         const std::vector<double>& residual, const std::vector<int>& feats,
                         const Config& cfg) {
    RegressionTree tree;
    const int n = static_cast<int>(X.size());

    std::vector<BuildNode> open;
    BuildNode root;
    root.samples.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) root.samples[static_cast<size_t>(i)] = i;
    root.split = best_split(X, grad, root.samples, feats, cfg.min_samples_leaf);
    root.tree_index = 0;
    tree.nodes.push_back(TreeNode{});
    open.push_back(std::move(root));

    int leaves = 1;
    while (leaves < cfg.max_leaves) {
        // best-first: expand the open leaf with the largest gain
        int pick = -1;
        for (size_t i = 0; i < open.size(); ++i) {
            if (!open[i].split.valid()) continue;
            if (pick < 0 || open[i].split.gain > open[static_cast<size_t>(pick)].split.gain)
                pick = static_cast<int>(i);
        }
        if (pick < 0) break;

        BuildNode node = std::move(open[static_cast<size_t>(pick)]);
        open.erase(open.begin() + pick);

        TreeNode& tn = tree.nodes[static_cast<size_t>(node.tree_index)];
        tn.feature = node.split.feature;
        tn.threshold = node.split.threshold;

        BuildNode left, right;
        for (int s : node.samples) {
            if (X[static_cast<size_t>(s)][static_cast<size_t>(node.split.feature)] < node.split.threshold)
                left.samples.push_back(s);
            else
                right.samples.push_back(s);
        }
        left.tree_index = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(TreeNode{});
        right.tree_index = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(TreeNode{});
        tree.nodes[static_cast<size_t>(node.tree_index)].left = left.tree_index;
        tree.nodes[static_cast<size_t>(node.tree_index)].right = right.tree_index;

        left.split = best_split(X, grad, left.samples, feats, cfg.min_samples_leaf);
        right.split = best_split(X, grad, right.samples, feats, cfg.min_samples_leaf);
        open.push_back(std::move(left));
        open.push_back(std::move(right));
        ++leaves;
    }

    // leaf values: median residual for MAE, mean residual for RMSE
    for (const auto& node : open) {
        std::vector<double> vals;
        vals.reserve(node.samples.size());
        for (int s : node.samples) vals.push_back(residual[static_cast<size_t>(s)]);
        double v = 0.0;
        if (cfg.loss == Loss::mae) {
            v = median_of(std::move(vals));
        } else {
            for (double x : vals) v += x;
            v /= static_cast<double>(vals.size());
        }
        tree.nodes[static_cast<size_t>(node.tree_index)].value = v;
    }
    return tree;
}

}  // namespace

GBDTModel fit(const Matrix& features, const std::vector<double>& targets, const Config& config) {
    const int n = static_cast<int>(features.size());
    if (n < 2) throw std::invalid_argument("fit: need at least 2 samples");
    if (features[0].empty()) throw std::invalid_argument("fit: zero features");
    const int n_features = static_cast<int>(features[0].size());
    if (targets.size() != features.size())
        throw std::invalid_argument("fit: targets not aligned with features");
    for (const auto& row : features) {
        if (static_cast<int>(row.size()) != n_features)
            throw std::invalid_argument("fit: ragged feature matrix");
        for (double v : row)
            if (!std::isfinite(v)) throw std::invalid_argument("fit: non-finite feature");
    }
    for (double t : targets)
        if (!std::isfinite(t)) throw std::invalid_argument("fit: non-finite target");
    if (config.feature_fraction <= 0 || config.feature_fraction > 1)
        throw std::invalid_argument("fit: feature_fraction must be in (0,1]");

    GBDTModel model;
    model.learning_rate = config.learning_rate;
    model.loss = config.loss;
    model.num_features = n_features;
    if (config.loss == Loss::mae) {
        model.base_prediction = median_of(targets);
    } else {
        double s = 0.0;
        for (double t : targets) s += t;
        model.base_prediction = s / n;
    }

    std::vector<double> residual(targets.size());
    for (int i = 0; i < n; ++i) residual[static_cast<size_t>(i)] = targets[static_cast<size_t>(i)] - model.base_prediction;

    const int subset_size =
        std::max(1, static_cast<int>(std::ceil(config.feature_fraction * n_features)));
    Rng rng(mix_seed(config.seed, 0x9bd7ULL));
    std::vector<int> all_feats(static_cast<size_t>(n_features));
    for (int f = 0; f < n_features; ++f) all_feats[static_cast<size_t>(f)] = f;

    std::vector<double> grad(targets.size());
    for (int round = 0; round < config.rounds; ++round) {
        std::vector<int> feats = all_feats;
        rng.shuffle(feats);
        feats.resize(static_cast<size_t>(subset_size));
        std::sort(feats.begin(), feats.end());

        if (config.loss == Loss::mae) {
            for (size_t i = 0; i < grad.size(); ++i)
                grad[i] = residual[i] > 0 ? 1.0 : (residual[i] < 0 ? -1.0 : 0.0);
        } else {
            grad = residual;
        }

        RegressionTree tree = grow_tree(features, grad, residual, feats, config);
        for (int i = 0; i < n; ++i)
            residual[static_cast<size_t>(i)] -=
                config.learning_rate * tree.predict(features[static_cast<size_t>(i)]);
        model.trees.push_back(std::move(tree));
    }
    return model;
}

EvalStats evaluate(const GBDTModel& model, const Matrix& features,
                   const std::vector<double>& targets) {
    const size_t n = features.size();
    if (n < 2) throw std::invalid_argument("evaluate: need at least 2 samples");
    if (targets.size() != n) throw std::invalid_argument("evaluate: targets not aligned");

    std::vector<double> pred(n);
    for (size_t i = 0; i < n; ++i) pred[i] = model.predict(features[i]);

    double mean_p = 0.0, mean_t = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mean_p += pred[i];
        mean_t += targets[i];
    }
    mean_p /= static_cast<double>(n);
    mean_t /= static_cast<double>(n);

    double cov = 0.0, var_p = 0.0, var_t = 0.0, abs_err = 0.0, sq_err = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double dp = pred[i] - mean_p;
        const double dt = targets[i] - mean_t;
        cov += dp * dt;
        var_p += dp * dp;
        var_t += dt * dt;
        abs_err += std::abs(pred[i] - targets[i]);
        sq_err += (pred[i] - targets[i]) * (pred[i] - targets[i]);
    }
    if (var_p <= 0 || var_t <= 0)
        throw std::invalid_argument("evaluate: constant predictions or targets; pearson undefined");

    EvalStats stats;
    stats.pearson = cov / std::sqrt(var_p * var_t);
    stats.mae = abs_err / static_cast<double>(n);
    stats.rmse = std::sqrt(sq_err / static_cast<double>(n));
    return stats;
}

nlohmann::json model_to_json(const GBDTModel& model) {
    nlohmann::json j;
    j["format"] = "credo.gbdt";
    j["version"] = 1;
    j["base_prediction"] = model.base_prediction;
    j["learning_rate"] = model.learning_rate;
    j["loss"] = model.loss == Loss::mae ? "mae" : "rmse";
    j["num_features"] = model.num_features;
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : model.trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : t.nodes)
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
        trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
    return j;
}

std::string features_to_csv(const Matrix& features) {
    if (features.empty()) return "";
    std::string out;
    for (size_t f = 0; f < features[0].size(); ++f) {
        if (f) out += ',';
        out += "f" + std::to_string(f);
    }
    out += '\n';
    char buf[40];
    for (const auto& row : features) {
        for (size_t f = 0; f < row.size(); ++f) {
            if (f) out += ',';
            std::snprintf(buf, sizeof(buf), "%.17g", row[f]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

Matrix features_from_csv(const std::string& text) {
    Matrix out;
    size_t pos = 0;
    bool header = true;
    size_t width = 0;
    while (pos < text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        size_t start = 0;
        while (true) {
            const size_t comma = line.find(',', start);
            const std::string tok =
                line.substr(start, comma == std::string::npos ? comma : comma - start);
            if (header) {
                if (tok.empty() || tok[0] != 'f')
                    throw std::runtime_error("feature CSV: expected f0..fN header, got: " + line);
            } else {
                row.push_back(std::stod(tok));
            }
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (header) {
            width = std::count(line.begin(), line.end(), ',') + 1;
            header = false;
            continue;
        }
        if (row.size() != width)
            throw std::runtime_error("feature CSV: ragged row: " + line);
        out.push_back(std::move(row));
    }
    return out;
}

GBDTModel model_from_json(const nlohmann::json& j) {
    if (j.at("format").get<std::string>() != "credo.gbdt")
        throw std::runtime_error("model JSON: unexpected format tag");
    if (j.at("version").get<int>() != 1)
        throw std::runtime_error("model JSON: unsupported version");
    GBDTModel model;
    model.base_prediction = j.at("base_prediction").get<double>();
    model.learning_rate = j.at("learning_rate").get<double>();
    model.loss = j.at("loss").get<std::string>() == "mae" ? Loss::mae : Loss::rmse;
    model.num_features = j.at("num_features").get<int>();
    for (const auto& tj : j.at("trees")) {
        RegressionTree t;
        for (const auto& nj : tj) {
            TreeNode n;
            n.feature = nj.at(0).get<int>();
            n.threshold = nj.at(1).get<double>();
            n.left = nj.at(2).get<int>();
            n.right = nj.at(3).get<int>();
            n.value = nj.at(4).get<double>();
            t.nodes.push_back(n);
        }
        model.trees.push_back(std::move(t));
    }
    return model;
}

}  // namespace credo::surrogate
