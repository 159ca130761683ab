#include "drowsy/featurize.hpp"

#include <algorithm>
#include <cmath>

namespace drowsy {

std::array<double, kStatsPerChannel> channel_statistics(std::span<const double> series) {
    const std::size_t n = series.size();
    require(n >= 2, "channel_statistics: need at least 2 values, got ", n);

    double sum = 0, vmax = series[0], vmin = series[0];
    for (double v : series) {
        sum += v;
        vmax = std::max(vmax, v);
        vmin = std::min(vmin, v);
    }
    const double mean = sum / double(n);

    double m2 = 0, m3 = 0, m4 = 0;
    for (double v : series) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= double(n);
    m3 /= double(n);
    m4 /= double(n);

    const double stddev = std::sqrt(m2);
    double skew = 0, kurt = 0;
    if (m2 >= 1e-12) {
        skew = m3 / (m2 * stddev);
        kurt = m4 / (m2 * m2) - 3.0;
    }
    return {mean, vmax, vmin, stddev, skew, kurt};
}

FeatureVector108 featurize_sample(const SampleDescriptor& sample) {
    FeatureVector108 out;
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        auto stats = channel_statistics(
            std::span<const double>(sample.grid.data() + c * kSampleSteps, kSampleSteps));
        std::copy(stats.begin(), stats.end(), out.values.begin() + c * kStatsPerChannel);
    }
    out.label = sample.label;
    out.participant_id = sample.participant_id;
    out.video_id = sample.video_id;
    out.start_frame = sample.start_frame;
    return out;
}

std::vector<std::string> feature_names() {
    std::vector<std::string> names;
    names.reserve(kNumFeatures);
    for (auto* ch : kChannelNames)
        for (auto* st : kStatNames) names.push_back(std::string(ch) + "_" + st);
    return names;
}

} // namespace drowsy
