#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "drowsy/dataset.hpp"
#include "drowsy/featurize.hpp"
#include "drowsy/layers.hpp"

namespace drowsy {

enum class ModelKind {
    MlpStats,
    MlpRaw,
    MlpEnc,
    Autoencoder,
    Conv1dRaw,
    Conv2dRaw,
    LstmRaw,
};

const char* model_name(ModelKind kind);
std::optional<ModelKind> model_from_name(const std::string& name);

// The seven model kinds; the autoencoder is listed last (it is not a
// classifier, it backs mlp-enc).
const std::vector<ModelKind>& all_model_kinds();
const std::vector<ModelKind>& classifier_model_kinds();

// What representation of a SampleDescriptor the model consumes.
enum class InputKind {
    Stats108,   // [N, 108] summary statistics
    Flat1800,   // [N, 1800] flattened channel-major grid
    Grid1d,     // [N, 18, 100]
    Grid2d,     // [N, 1, 18, 100]
    Seq,        // [N, 100, 18]
    Encoded108, // [N, 108] autoencoder encodings
};

InputKind model_input_kind(ModelKind kind);

class Network {
public:
    std::vector<std::unique_ptr<Layer>> layers;

    Tensor forward(const Tensor& x, bool train);
    // Forward through the first n layers only (used for the encoder half).
    Tensor forward_prefix(const Tensor& x, bool train, std::size_t n_layers);
    Tensor backward(const Tensor& grad_out);
    std::vector<ParamRef> params();
    void zero_grad();
    void seed_dropout(std::uint64_t base_seed);
    std::size_t parameter_count();
};

// Pinned architectures. Weights are initialized from the seed; identical
// seeds build identical networks.
Network build_model(ModelKind kind, std::uint64_t seed);

// Number of leading layers forming the autoencoder's encoder half.
inline constexpr std::size_t kEncoderLayers = 8;

struct TrainConfig {
    std::size_t epochs = 20;
    std::size_t batch_size = 64;
    std::uint64_t seed = 0;
    bool shuffle = true;
};

struct TrainHistory {
    std::vector<double> train_loss; // one entry per epoch
    std::vector<double> val_loss;   // empty when no validation set given
};

// Mini-batch Adam with a seeded shuffle per epoch; runs exactly
// config.epochs epochs, no early stopping. Labels are merged-class indices.
TrainHistory train_classifier(Network& net, const Tensor& X, const std::vector<int>& y,
                              const Tensor* X_val, const std::vector<int>* y_val,
                              const TrainConfig& config);

// MAE reconstruction training; labels unused by construction.
TrainHistory train_autoencoder(Network& net, const Tensor& X, const Tensor* X_val,
                               const TrainConfig& config);

// Softmax class probabilities, eval mode; rows sum to 1.
Tensor predict_scores(Network& net, const Tensor& X);

// Deterministic encoder forward pass of a trained autoencoder -> [N, 108].
Tensor encode_samples(Network& autoencoder, const Tensor& X);

// ---- input assembly ----

// Builds the tensor a model consumes from (already normalized, where
// applicable) sample descriptors. Stats108 callers pass featurized vectors
// instead; see pipeline.
Tensor assemble_input(InputKind kind, const std::vector<SampleDescriptor>& samples);

Tensor assemble_stats_input(const std::vector<FeatureVector108>& features);

std::vector<int> labels_of(const std::vector<SampleDescriptor>& samples);

} // namespace drowsy
