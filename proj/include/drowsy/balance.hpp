#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "drowsy/dataset.hpp"

namespace drowsy {

struct SmoteConfig {
    std::size_t k_neighbors = 5;
    std::uint64_t seed = 0;
};

// k nearest points to points[query] under the Euclidean metric, self
// excluded, distance ties broken by lower index. Needs at least k+1 points.
std::vector<std::size_t> knn(const std::vector<std::vector<double>>& points, std::size_t query,
                             std::size_t k);

// Equalize-to-majority SMOTE over flattened 1800-D descriptors. Synthetic
// points interpolate between a class member and one of its within-class
// nearest neighbors; originals are preserved verbatim and synthetics are
// tagged. Only the training split may be balanced; split_name guards that.
std::vector<SampleDescriptor> smote_oversample(const std::vector<SampleDescriptor>& samples,
                                               const SmoteConfig& config,
                                               const std::string& split_name = "train");

} // namespace drowsy
