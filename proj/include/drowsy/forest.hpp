#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "drowsy/featurize.hpp"

namespace drowsy {

struct ForestConfig {
    std::size_t n_trees = 100;
    std::size_t max_depth = 20;
    std::size_t features_per_split = 10; // floor(sqrt(108))
    std::size_t min_samples_split = 2;
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

// Flat node array, root at index 0. Internal nodes route x[feature] <=
// threshold to the left child; leaves carry training class counts.
struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::size_t n_samples = 0;
    double impurity_decrease = 0.0;           // internal nodes
    std::array<std::size_t, kNumClasses> class_counts{}; // leaves
};

struct DecisionTree {
    std::vector<TreeNode> nodes;
};

struct RandomForest {
    ForestConfig config;
    std::vector<DecisionTree> trees;

    bool fitted() const { return !trees.empty(); }
};

struct ImportanceReport {
    std::array<double, kNumFeatures> per_feature{};  // sums to 1
    std::array<double, kNumChannels> per_channel{};  // sums to 1
};

// 1 - sum p_i^2 over the 3 classes; counts must not all be zero.
double gini(const std::array<std::size_t, kNumClasses>& class_counts);

struct SplitChoice {
    std::size_t feature = 0;
    double threshold = 0.0;
    double impurity_decrease = 0.0;
};

// Best midpoint split over the candidate features, maximizing weighted
// impurity decrease. Ties break to the lowest feature index, then the lowest
// threshold. Empty when no split decreases impurity.
std::optional<SplitChoice> best_split(const std::vector<const FeatureVector108*>& rows,
                                      const std::vector<std::size_t>& candidate_features);

RandomForest fit_forest(const std::vector<FeatureVector108>& train, const ForestConfig& config);

std::array<double, kNumClasses> predict_proba(const RandomForest& forest,
                                              const FeatureVector108& x);

// Mean decrease in impurity, averaged over trees and normalized to sum 1;
// per-channel values aggregate the 6 statistic slots of each channel.
ImportanceReport feature_importance(const RandomForest& forest);

} // namespace drowsy
