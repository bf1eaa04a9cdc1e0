#include "nnrules/tree.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace nnrules {

namespace {

struct FitContext {
    const ActivationMatrix& acts;
    const std::vector<std::int64_t>& labels;
    const std::vector<double>& weights;
    std::optional<std::size_t> max_depth;
    std::vector<TreeNode>* nodes;
};

double gini(const std::map<std::int64_t, double>& class_weight, double total) {
    double g = 1.0;
    for (const auto& [label, w] : class_weight) {
        double p = w / total;
        g -= p * p;
    }
    return g;
}

struct SplitChoice {
    double impurity;
    int feature;
    double threshold;
};

// Weighted Gini of the best midpoint split inside one node, or nullopt when
// every feature is constant over the node's samples.
std::optional<SplitChoice> best_split(const FitContext& ctx, const std::vector<std::size_t>& idx,
                                      double node_weight) {
    std::optional<SplitChoice> best;
    std::size_t n_features = ctx.acts.n_cols;
    std::vector<std::pair<double, std::size_t>> order(idx.size());

    for (std::size_t f = 0; f < n_features; ++f) {
        for (std::size_t k = 0; k < idx.size(); ++k)
            order[k] = {ctx.acts.values[idx[k] * n_features + f], idx[k]};
        std::sort(order.begin(), order.end());
        if (order.front().first == order.back().first) continue;

        std::map<std::int64_t, double> left, right;
        double left_w = 0.0, right_w = node_weight;
        for (std::size_t k = 0; k < idx.size(); ++k)
            right[ctx.labels[order[k].second]] += ctx.weights[order[k].second];

        for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
            double w = ctx.weights[order[k].second];
            std::int64_t lab = ctx.labels[order[k].second];
            left[lab] += w;
            left_w += w;
            right[lab] -= w;
            right_w -= w;
            if (order[k].first == order[k + 1].first) continue;
            double threshold = order[k].first + (order[k + 1].first - order[k].first) / 2.0;
            double impurity =
                (left_w * gini(left, left_w) + right_w * gini(right, right_w)) / node_weight;
            if (!best || impurity < best->impurity ||
                (impurity == best->impurity &&
                 (static_cast<int>(f) < best->feature ||
                  (static_cast<int>(f) == best->feature && threshold < best->threshold))))
                best = SplitChoice{impurity, static_cast<int>(f), threshold};
        }
    }
    return best;
}

int build_node(const FitContext& ctx, const std::vector<std::size_t>& idx, std::size_t depth) {
    std::map<std::int64_t, std::size_t> counts;
    std::map<std::int64_t, double> class_weight;
    double node_weight = 0.0;
    for (std::size_t i : idx) {
        ++counts[ctx.labels[i]];
        class_weight[ctx.labels[i]] += ctx.weights[i];
        node_weight += ctx.weights[i];
    }

    auto make_leaf = [&]() {
        TreeNode leaf;
        leaf.counts.assign(counts.begin(), counts.end());
        ctx.nodes->push_back(std::move(leaf));
        return static_cast<int>(ctx.nodes->size() - 1);
    };

    bool pure = counts.size() == 1;
    bool depth_capped = ctx.max_depth && depth >= *ctx.max_depth;
    if (pure || depth_capped) return make_leaf();

    std::optional<SplitChoice> split = best_split(ctx, idx, node_weight);
    if (!split || split->impurity >= gini(class_weight, node_weight)) return make_leaf();

    std::vector<std::size_t> left_idx, right_idx;
    std::size_t n_features = ctx.acts.n_cols;
    for (std::size_t i : idx) {
        double v = ctx.acts.values[i * n_features + static_cast<std::size_t>(split->feature)];
        (v <= split->threshold ? left_idx : right_idx).push_back(i);
    }

    ctx.nodes->push_back(TreeNode{});
    int self = static_cast<int>(ctx.nodes->size() - 1);
    int left = build_node(ctx, left_idx, depth + 1);
    int right = build_node(ctx, right_idx, depth + 1);
    TreeNode& node = (*ctx.nodes)[static_cast<std::size_t>(self)];
    node.feature = split->feature;
    node.threshold = split->threshold;
    node.left = left;
    node.right = right;
    return self;
}

}  // namespace

DecisionTree fit_tree(const ActivationMatrix& acts_matrix, const LabelVector& labels,
                      const std::vector<double>& weights, std::uint64_t seed,
                      std::optional<std::size_t> max_depth, bool acts_mode) {
    if (acts_matrix.n_rows == 0) raise(ErrorKind::EmptyDataset, "no samples to fit");
    if (labels.size() != acts_matrix.n_rows)
        raise(ErrorKind::DimensionMismatch, "label count does not match activation rows");
    std::vector<double> w = weights;
    if (w.empty()) w.assign(acts_matrix.n_rows, 1.0);
    if (w.size() != acts_matrix.n_rows)
        raise(ErrorKind::DimensionMismatch, "weight count does not match activation rows");

    DecisionTree tree;
    tree.layer = acts_matrix.layer;
    tree.seed = seed;
    tree.acts = acts_mode;
    tree.n_features = acts_matrix.n_cols;

    FitContext ctx{acts_matrix, labels.values, w, max_depth, &tree.nodes};
    std::vector<std::size_t> idx(acts_matrix.n_rows);
    std::iota(idx.begin(), idx.end(), 0);
    build_node(ctx, idx, 0);
    return tree;
}

std::size_t DecisionTree::leaf_for(const std::vector<double>& x) const {
    if (x.size() < n_features)
        raise(ErrorKind::DimensionMismatch, "input shorter than tree feature count");
    std::size_t cur = 0;
    while (!nodes[cur].is_leaf()) {
        const TreeNode& n = nodes[cur];
        cur = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold
                                           ? n.left
                                           : n.right);
    }
    return cur;
}

std::int64_t DecisionTree::predict(const std::vector<double>& x) const {
    const TreeNode& leaf = nodes[leaf_for(x)];
    std::int64_t best_label = leaf.counts.front().first;
    std::size_t best_count = leaf.counts.front().second;
    for (const auto& [label, count] : leaf.counts)
        if (count > best_count) {  // counts are label-ascending; ties keep the lowest
            best_label = label;
            best_count = count;
        }
    return best_label;
}

std::string tree_to_json(const DecisionTree& tree) {
    nlohmann::ordered_json doc;
    doc["layer"] = tap_to_string(tree.layer);
    doc["seed"] = tree.seed;
    doc["acts"] = tree.acts;
    doc["n_features"] = tree.n_features;
    auto nodes = nlohmann::ordered_json::array();
    for (const TreeNode& n : tree.nodes) {
        nlohmann::ordered_json jn;
        if (n.is_leaf()) {
            auto counts = nlohmann::ordered_json::array();
            for (const auto& [label, count] : n.counts)
                counts.push_back(nlohmann::ordered_json::array({label, count}));
            jn["counts"] = std::move(counts);
        } else {
            jn["feature"] = n.feature;
            jn["threshold"] = n.threshold;
            jn["left"] = n.left;
            jn["right"] = n.right;
        }
        nodes.push_back(std::move(jn));
    }
    doc["nodes"] = std::move(nodes);
    return doc.dump(2);
}

DecisionTree tree_from_json(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        raise(ErrorKind::SchemaViolation, std::string("tree JSON parse error: ") + e.what());
    }
    DecisionTree tree;
    try {
        tree.layer = tap_from_string(doc.at("layer").get<std::string>());
        tree.seed = doc.at("seed").get<std::uint64_t>();
        tree.acts = doc.at("acts").get<bool>();
        tree.n_features = doc.at("n_features").get<std::size_t>();
        for (const auto& jn : doc.at("nodes")) {
            TreeNode n;
            if (jn.contains("counts")) {
                for (const auto& pair : jn["counts"])
                    n.counts.emplace_back(pair.at(0).get<std::int64_t>(),
                                          pair.at(1).get<std::size_t>());
                if (n.counts.empty())
                    raise(ErrorKind::SchemaViolation, "leaf with empty class counts");
            } else {
                n.feature = jn.at("feature").get<int>();
                n.threshold = jn.at("threshold").get<double>();
                n.left = jn.at("left").get<int>();
                n.right = jn.at("right").get<int>();
            }
            tree.nodes.push_back(std::move(n));
        }
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorKind::SchemaViolation, std::string("tree JSON: ") + e.what());
    }
    if (tree.nodes.empty()) raise(ErrorKind::SchemaViolation, "tree JSON has no nodes");
    return tree;
}

void save_tree(const DecisionTree& tree, const std::string& path) {
    std::ofstream f(path);
    if (!f) raise(ErrorKind::IoFailure, "cannot open " + path + " for writing");
    f << tree_to_json(tree) << "\n";
}

DecisionTree load_tree(const std::string& path) {
    std::ifstream f(path);
    if (!f) raise(ErrorKind::IoFailure, "cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return tree_from_json(ss.str());
}

}  // namespace nnrules
