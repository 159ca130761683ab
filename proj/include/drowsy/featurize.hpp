#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "drowsy/dataset.hpp"

namespace drowsy {

inline constexpr std::size_t kStatsPerChannel = 6;
inline constexpr std::size_t kNumFeatures = kNumChannels * kStatsPerChannel; // 108

inline constexpr std::array<const char*, kStatsPerChannel> kStatNames = {
    "mean", "max", "min", "std", "skew", "kurt",
};

// Six statistics per channel, channel-major: the RF-baseline and MLP-stats
// input representation.
struct FeatureVector108 {
    std::array<double, kNumFeatures> values{};
    MergedLabel label = MergedLabel::Alert;
    std::string participant_id;
    std::string video_id;
    std::int64_t start_frame = 0;
};

// (mean, max, min, population std, skewness g1, excess kurtosis g2).
// Skewness and kurtosis are defined as 0 when the second central moment
// vanishes (below 1e-12).
std::array<double, kStatsPerChannel> channel_statistics(std::span<const double> series);

FeatureVector108 featurize_sample(const SampleDescriptor& sample);

// Column names for the optional feature dump: "<channel>_<stat>".
std::vector<std::string> feature_names();

} // namespace drowsy
