#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nnrules/extraction.hpp"

namespace nnrules {

struct TreeNode {
    // Internal node: feature >= 0, children set. Left branch takes
    // feature <= threshold, right branch feature > threshold.
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    // Leaf payload: raw sample count per label, ascending by label.
    std::vector<std::pair<std::int64_t, std::size_t>> counts;

    bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // preorder, root at 0
    LayerTap layer;
    std::uint64_t seed = 0;
    bool acts = false;
    std::size_t n_features = 0;

    std::int64_t predict(const std::vector<double>& x) const;  // majority, tie -> lowest label
    std::size_t leaf_for(const std::vector<double>& x) const;
};

// CART: greedy splits minimizing weighted Gini impurity over midpoint
// thresholds. Ties break toward the lowest feature index, then the lowest
// threshold. Growth stops at purity, max_depth, or when no split reduces
// impurity, so the result is deterministic for fixed inputs.
DecisionTree fit_tree(const ActivationMatrix& acts_matrix, const LabelVector& labels,
                      const std::vector<double>& weights = {},
                      std::uint64_t seed = 0,
                      std::optional<std::size_t> max_depth = std::nullopt,
                      bool acts_mode = false);

std::string tree_to_json(const DecisionTree& tree);
DecisionTree tree_from_json(const std::string& json_text);
void save_tree(const DecisionTree& tree, const std::string& path);
DecisionTree load_tree(const std::string& path);

}  // namespace nnrules
