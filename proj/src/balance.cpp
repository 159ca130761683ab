#include "drowsy/balance.hpp"

#include <algorithm>
#include <cmath>

#include "drowsy/rng.hpp"

namespace drowsy {

std::vector<std::size_t> knn(const std::vector<std::vector<double>>& points, std::size_t query,
                             std::size_t k) {
    require(points.size() >= k + 1, "knn: need at least ", k + 1, " points, got ", points.size());
    require(query < points.size(), "knn: query index out of range");

    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(points.size() - 1);
    const auto& q = points[query];
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i == query) continue;
        double d2 = 0;
        for (std::size_t j = 0; j < q.size(); ++j) {
            const double d = points[i][j] - q[j];
            d2 += d * d;
        }
        dist.emplace_back(d2, i);
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
    return out;
}

std::vector<SampleDescriptor> smote_oversample(const std::vector<SampleDescriptor>& samples,
                                               const SmoteConfig& config,
                                               const std::string& split_name) {
    require(split_name == "train", "smote: refusing to oversample the '", split_name,
            "' split; SMOTE applies to training data only");
    require(config.k_neighbors >= 1, "smote: k_neighbors must be >= 1");
    require(!samples.empty(), "smote: empty sample set");

    std::array<std::vector<std::size_t>, kNumClasses> members;
    for (std::size_t i = 0; i < samples.size(); ++i)
        members[std::size_t(samples[i].label)].push_back(i);

    std::size_t majority = 0;
    for (const auto& m : members) majority = std::max(majority, m.size());

    std::vector<SampleDescriptor> out = samples;
    for (int cls = 0; cls < kNumClasses; ++cls) {
        const auto& idx = members[cls];
        if (idx.size() == majority || idx.empty()) continue;
        require(idx.size() >= 2, "smote: class ", merged_label_name(MergedLabel(cls)),
                " has fewer than 2 members");

        // Within-class neighbor lists; k capped by class size.
        const std::size_t k = std::min(config.k_neighbors, idx.size() - 1);
        std::vector<std::vector<double>> points(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) points[i] = samples[idx[i]].grid;
        std::vector<std::vector<std::size_t>> neighbors(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) neighbors[i] = knn(points, i, k);

        Rng rng(derive_seed(config.seed, "smote-class", std::uint64_t(cls)));
        std::size_t produced = 0;
        while (idx.size() + produced < majority) {
            const std::size_t i = std::size_t(rng.below(idx.size()));
            const std::size_t nn = neighbors[i][std::size_t(rng.below(k))];
            const double lambda = rng.uniform();

            SampleDescriptor synth;
            synth.grid.resize(points[i].size());
            for (std::size_t j = 0; j < points[i].size(); ++j)
                synth.grid[j] = points[i][j] + lambda * (points[nn][j] - points[i][j]);
            synth.label = MergedLabel(cls);
            synth.participant_id = "smote";
            synth.video_id = merged_label_name(MergedLabel(cls));
            synth.start_frame = std::int64_t(produced);
            synth.synthetic = true;
            out.push_back(std::move(synth));
            ++produced;
        }
    }
    return out;
}

} // namespace drowsy
