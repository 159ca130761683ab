#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "drowsy/forest.hpp"
#include "drowsy/models.hpp"

namespace drowsy {

// Structured text checkpoints. Doubles are written in shortest round-trip
// form, so save -> load -> save is byte-identical.

struct NetworkCheckpoint {
    std::string model;
    std::uint64_t seed = 0;
    std::optional<ChannelNormalizer> normalizer;
    std::string config_echo; // single-line JSON provenance, may be empty
    Network net;
};

void save_network_checkpoint(std::ostream& out, const std::string& model_name, Network& net,
                             std::uint64_t seed, const ChannelNormalizer* normalizer,
                             const std::string& config_echo);

NetworkCheckpoint load_network_checkpoint(std::istream& in);

struct ForestCheckpoint {
    RandomForest forest;
    std::string config_echo;
};

void save_forest_checkpoint(std::ostream& out, const RandomForest& forest,
                            const std::string& config_echo);

ForestCheckpoint load_forest_checkpoint(std::istream& in);

} // namespace drowsy
