#include "drowsy/forest.hpp"

#include <algorithm>
#include <cmath>

#include "drowsy/rng.hpp"

namespace drowsy {

double gini(const std::array<std::size_t, kNumClasses>& class_counts) {
    std::size_t total = 0;
    for (auto c : class_counts) total += c;
    require(total > 0, "gini: zero total count");
    double sum_sq = 0;
    for (auto c : class_counts) {
        const double p = double(c) / double(total);
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

namespace {

std::array<std::size_t, kNumClasses> count_classes(const std::vector<const FeatureVector108*>& rows) {
    std::array<std::size_t, kNumClasses> counts{};
    for (const auto* r : rows) ++counts[std::size_t(r->label)];
    return counts;
}

} // namespace

std::optional<SplitChoice> best_split(const std::vector<const FeatureVector108*>& rows,
                                      const std::vector<std::size_t>& candidate_features) {
    const std::size_t n = rows.size();
    if (n < 2) return std::nullopt;

    const auto parent_counts = count_classes(rows);
    const double parent_gini = gini(parent_counts);

    // Evaluate candidates in ascending feature order so equal decreases
    // resolve to the lowest feature index.
    std::vector<std::size_t> features = candidate_features;
    std::sort(features.begin(), features.end());
    features.erase(std::unique(features.begin(), features.end()), features.end());

    std::optional<SplitChoice> best;
    std::vector<std::size_t> order(n);

    for (std::size_t feat : features) {
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return rows[a]->values[feat] < rows[b]->values[feat];
        });

        std::array<std::size_t, kNumClasses> left{};
        auto right = parent_counts;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const std::size_t cls = std::size_t(rows[order[i]]->label);
            ++left[cls];
            --right[cls];

            const double a = rows[order[i]]->values[feat];
            const double b = rows[order[i + 1]]->values[feat];
            if (a == b) continue;

            double threshold = a + (b - a) / 2.0;
            if (threshold >= b) threshold = a; // midpoint rounded up to b

            const double n_left = double(i + 1);
            const double n_right = double(n - i - 1);
            const double decrease = parent_gini - (n_left / double(n)) * gini(left) -
                                    (n_right / double(n)) * gini(right);
            if (decrease <= 0) continue;
            if (!best || decrease > best->impurity_decrease ||
                (decrease == best->impurity_decrease &&
                 (feat < best->feature || (feat == best->feature && threshold < best->threshold)))) {
                best = SplitChoice{feat, threshold, decrease};
            }
        }
    }
    return best;
}

namespace {

struct TreeBuilder {
    const ForestConfig& config;
    Rng& rng;
    DecisionTree tree;

    std::vector<std::size_t> draw_features() {
        // Without replacement, partial Fisher-Yates over the feature range.
        std::vector<std::size_t> all(kNumFeatures);
        for (std::size_t i = 0; i < kNumFeatures; ++i) all[i] = i;
        const std::size_t k = std::min(config.features_per_split, all.size());
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + std::size_t(rng.below(all.size() - i));
            std::swap(all[i], all[j]);
        }
        all.resize(k);
        return all;
    }

    int build(std::vector<const FeatureVector108*>& rows, std::size_t depth) {
        const auto counts = count_classes(rows);
        const int node_index = int(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[node_index].n_samples = rows.size();

        const bool pure = std::count(counts.begin(), counts.end(), std::size_t(0)) == kNumClasses - 1;
        std::optional<SplitChoice> split;
        if (!pure && depth < config.max_depth && rows.size() >= config.min_samples_split)
            split = best_split(rows, draw_features());

        if (!split) {
            tree.nodes[node_index].class_counts = counts;
            return node_index;
        }

        std::vector<const FeatureVector108*> left_rows, right_rows;
        left_rows.reserve(rows.size());
        right_rows.reserve(rows.size());
        for (const auto* r : rows) {
            if (r->values[split->feature] <= split->threshold)
                left_rows.push_back(r);
            else
                right_rows.push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        tree.nodes[node_index].feature = int(split->feature);
        tree.nodes[node_index].threshold = split->threshold;
        tree.nodes[node_index].impurity_decrease = split->impurity_decrease;
        const int left = build(left_rows, depth + 1);
        tree.nodes[node_index].left = left;
        const int right = build(right_rows, depth + 1);
        tree.nodes[node_index].right = right;
        return node_index;
    }
};

} // namespace

RandomForest fit_forest(const std::vector<FeatureVector108>& train, const ForestConfig& config) {
    require(!train.empty(), "fit_forest: empty training set");
    require(config.n_trees >= 1 && config.max_depth >= 1, "fit_forest: bad config");
    require(config.features_per_split >= 1 && config.features_per_split <= kNumFeatures,
            "fit_forest: features_per_split out of range");

    RandomForest forest;
    forest.config = config;
    forest.trees.reserve(config.n_trees);

    for (std::size_t t = 0; t < config.n_trees; ++t) {
        Rng rng(derive_seed(config.seed, "tree", t));
        std::vector<const FeatureVector108*> rows;
        rows.reserve(train.size());
        if (config.bootstrap) {
            for (std::size_t i = 0; i < train.size(); ++i)
                rows.push_back(&train[rng.below(train.size())]);
        } else {
            for (const auto& r : train) rows.push_back(&r);
        }
        TreeBuilder builder{config, rng, {}};
        builder.build(rows, 0);
        forest.trees.push_back(std::move(builder.tree));
    }
    return forest;
}

std::array<double, kNumClasses> predict_proba(const RandomForest& forest,
                                              const FeatureVector108& x) {
    require(forest.fitted(), "predict_proba: forest is not fitted");
    std::array<double, kNumClasses> proba{};
    for (const auto& tree : forest.trees) {
        int node = 0;
        while (tree.nodes[node].feature >= 0) {
            const auto& nd = tree.nodes[node];
            node = x.values[std::size_t(nd.feature)] <= nd.threshold ? nd.left : nd.right;
        }
        const auto& counts = tree.nodes[node].class_counts;
        std::size_t total = 0;
        for (auto c : counts) total += c;
        for (int k = 0; k < kNumClasses; ++k) proba[k] += double(counts[k]) / double(total);
    }
    for (auto& p : proba) p /= double(forest.trees.size());
    return proba;
}

ImportanceReport feature_importance(const RandomForest& forest) {
    require(forest.fitted(), "feature_importance: forest is not fitted");
    ImportanceReport report;
    for (const auto& tree : forest.trees) {
        const double n_root = double(tree.nodes[0].n_samples);
        for (const auto& nd : tree.nodes) {
            if (nd.feature < 0) continue;
            report.per_feature[std::size_t(nd.feature)] +=
                (double(nd.n_samples) / n_root) * nd.impurity_decrease;
        }
    }
    double total = 0;
    for (double v : report.per_feature) total += v;
    require(total > 0, "feature_importance: forest contains no splits");
    for (auto& v : report.per_feature) v /= total;
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        double sum = 0;
        for (std::size_t s = 0; s < kStatsPerChannel; ++s)
            sum += report.per_feature[c * kStatsPerChannel + s];
        report.per_channel[c] = sum;
    }
    return report;
}

} // namespace drowsy
