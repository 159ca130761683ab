#include "drowsy/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "drowsy/optim.hpp"

namespace drowsy {

const char* model_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::MlpStats: return "mlp-stats";
        case ModelKind::MlpRaw: return "mlp-raw";
        case ModelKind::MlpEnc: return "mlp-enc";
        case ModelKind::Autoencoder: return "autoencoder";
        case ModelKind::Conv1dRaw: return "conv1d-raw";
        case ModelKind::Conv2dRaw: return "conv2d-raw";
        case ModelKind::LstmRaw: return "lstm-raw";
    }
    return "?";
}

std::optional<ModelKind> model_from_name(const std::string& name) {
    for (ModelKind k : all_model_kinds())
        if (name == model_name(k)) return k;
    return std::nullopt;
}

const std::vector<ModelKind>& all_model_kinds() {
    static const std::vector<ModelKind> kinds = {
        ModelKind::MlpStats, ModelKind::MlpRaw,    ModelKind::MlpEnc,  ModelKind::Conv1dRaw,
        ModelKind::Conv2dRaw, ModelKind::LstmRaw,  ModelKind::Autoencoder,
    };
    return kinds;
}

const std::vector<ModelKind>& classifier_model_kinds() {
    static const std::vector<ModelKind> kinds = {
        ModelKind::MlpStats, ModelKind::MlpRaw,   ModelKind::MlpEnc,
        ModelKind::Conv1dRaw, ModelKind::Conv2dRaw, ModelKind::LstmRaw,
    };
    return kinds;
}

InputKind model_input_kind(ModelKind kind) {
    switch (kind) {
        case ModelKind::MlpStats: return InputKind::Stats108;
        case ModelKind::MlpRaw: return InputKind::Flat1800;
        case ModelKind::MlpEnc: return InputKind::Encoded108;
        case ModelKind::Autoencoder: return InputKind::Flat1800;
        case ModelKind::Conv1dRaw: return InputKind::Grid1d;
        case ModelKind::Conv2dRaw: return InputKind::Grid2d;
        case ModelKind::LstmRaw: return InputKind::Seq;
    }
    fail("model_input_kind: bad kind");
}

// ---- Network ----

Tensor Network::forward(const Tensor& x, bool train) {
    return forward_prefix(x, train, layers.size());
}

Tensor Network::forward_prefix(const Tensor& x, bool train, std::size_t n_layers) {
    require(n_layers <= layers.size(), "forward_prefix: prefix longer than network");
    Tensor h = x;
    for (std::size_t i = 0; i < n_layers; ++i) h = layers[i]->forward(h, train);
    return h;
}

Tensor Network::backward(const Tensor& grad_out) {
    Tensor g = grad_out;
    for (std::size_t i = layers.size(); i-- > 0;) g = layers[i]->backward(g);
    return g;
}

std::vector<ParamRef> Network::params() {
    std::vector<ParamRef> out;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        auto refs = layers[i]->params("L" + std::to_string(i));
        out.insert(out.end(), refs.begin(), refs.end());
    }
    return out;
}

void Network::zero_grad() {
    for (auto& p : params()) p.grad->fill(0.0);
}

void Network::seed_dropout(std::uint64_t base_seed) {
    for (std::size_t i = 0; i < layers.size(); ++i)
        layers[i]->seed_dropout(derive_seed(base_seed, "dropout", i));
}

std::size_t Network::parameter_count() {
    std::size_t n = 0;
    for (auto& p : params()) n += p.value->numel();
    return n;
}

// ---- architectures ----

namespace {

void add_mlp_head(Network& net, std::size_t in_dim) {
    net.layers.push_back(std::make_unique<Dense>(in_dim, 4));
    net.layers.push_back(std::make_unique<LeakyReLU>());
    net.layers.push_back(std::make_unique<Dense>(4, 3));
}

} // namespace

Network build_model(ModelKind kind, std::uint64_t seed) {
    Network net;
    switch (kind) {
        case ModelKind::MlpStats: add_mlp_head(net, kNumFeatures); break;
        case ModelKind::MlpRaw: add_mlp_head(net, kNumChannels * kSampleSteps); break;
        case ModelKind::MlpEnc: add_mlp_head(net, kNumFeatures); break;
        case ModelKind::Autoencoder: {
            // Encoder 1800 -> 900 -> 450 -> 216 -> 108, decoder mirrored;
            // the final reconstruction layer is linear.
            const std::size_t widths[] = {1800, 900, 450, 216, 108};
            for (int i = 0; i < 4; ++i) {
                net.layers.push_back(std::make_unique<Dense>(widths[i], widths[i + 1]));
                net.layers.push_back(std::make_unique<LeakyReLU>());
            }
            for (int i = 4; i > 0; --i) {
                net.layers.push_back(std::make_unique<Dense>(widths[i], widths[i - 1]));
                if (i > 1) net.layers.push_back(std::make_unique<LeakyReLU>());
            }
            break;
        }
        case ModelKind::Conv1dRaw: {
            const std::size_t chans[] = {18, 32, 64, 64, 128};
            const std::size_t kernels[] = {5, 5, 3, 3};
            for (int i = 0; i < 4; ++i) {
                net.layers.push_back(std::make_unique<Conv1D>(chans[i], chans[i + 1], kernels[i], 2));
                net.layers.push_back(std::make_unique<LeakyReLU>());
            }
            net.layers.push_back(std::make_unique<Dropout>(0.3));
            net.layers.push_back(std::make_unique<GlobalAvgPool>());
            net.layers.push_back(std::make_unique<Dense>(128, 3));
            break;
        }
        case ModelKind::Conv2dRaw: {
            net.layers.push_back(std::make_unique<Conv2D>(1, 16, 3, 3, 2, 2));
            net.layers.push_back(std::make_unique<LeakyReLU>());
            net.layers.push_back(std::make_unique<Conv2D>(16, 32, 3, 3, 2, 2));
            net.layers.push_back(std::make_unique<LeakyReLU>());
            net.layers.push_back(std::make_unique<Conv2D>(32, 64, 3, 3, 1, 2));
            net.layers.push_back(std::make_unique<LeakyReLU>());
            net.layers.push_back(std::make_unique<Dropout>(0.3));
            net.layers.push_back(std::make_unique<GlobalAvgPool>());
            net.layers.push_back(std::make_unique<Dense>(64, 3));
            break;
        }
        case ModelKind::LstmRaw: {
            net.layers.push_back(std::make_unique<LSTM>(18, 64, true));
            net.layers.push_back(std::make_unique<LSTM>(64, 64, false));
            net.layers.push_back(std::make_unique<Dense>(64, 3));
            break;
        }
    }
    Rng rng(derive_seed(seed, "init"));
    for (auto& layer : net.layers) layer->init_params(rng);
    return net;
}

// ---- training ----

namespace {

Tensor gather_rows(const Tensor& X, const std::vector<std::size_t>& idx, std::size_t begin,
                   std::size_t end) {
    const std::size_t N = X.dim(0);
    const std::size_t row = X.numel() / N;
    std::vector<std::size_t> shape = X.shape;
    shape[0] = end - begin;
    Tensor out(shape);
    for (std::size_t i = begin; i < end; ++i)
        std::copy_n(X.data.data() + idx[i] * row, row, out.data.data() + (i - begin) * row);
    return out;
}

double eval_classifier_loss(Network& net, const Tensor& X, const std::vector<int>& y) {
    const std::size_t N = X.dim(0);
    std::vector<std::size_t> idx(N);
    std::iota(idx.begin(), idx.end(), 0);
    double total = 0;
    constexpr std::size_t kChunk = 256;
    for (std::size_t b = 0; b < N; b += kChunk) {
        const std::size_t e = std::min(b + kChunk, N);
        Tensor logits = net.forward(gather_rows(X, idx, b, e), false);
        std::vector<int> yb(y.begin() + b, y.begin() + e);
        total += softmax_cross_entropy(logits, one_hot(yb, kNumClasses)).loss * double(e - b);
    }
    return total / double(N);
}

double eval_reconstruction_loss(Network& net, const Tensor& X) {
    const std::size_t N = X.dim(0);
    std::vector<std::size_t> idx(N);
    std::iota(idx.begin(), idx.end(), 0);
    double total = 0;
    constexpr std::size_t kChunk = 256;
    for (std::size_t b = 0; b < N; b += kChunk) {
        const std::size_t e = std::min(b + kChunk, N);
        Tensor xb = gather_rows(X, idx, b, e);
        Tensor recon = net.forward(xb, false);
        total += mae_loss(recon, xb).loss * double(e - b);
    }
    return total / double(N);
}

template <typename BatchLoss>
TrainHistory run_training(Network& net, std::size_t n_samples, const TrainConfig& config,
                          BatchLoss&& batch_loss, std::function<double()> val_loss) {
    require(config.epochs >= 1, "train: epochs must be >= 1");
    require(config.batch_size >= 1, "train: batch_size must be >= 1");
    require(n_samples >= 1, "train: empty training set");

    net.seed_dropout(derive_seed(config.seed, "train-dropout"));
    Adam optimizer;
    auto params = net.params();

    std::vector<std::size_t> perm(n_samples);
    std::iota(perm.begin(), perm.end(), 0);
    Rng shuffle_rng(derive_seed(config.seed, "shuffle"));

    TrainHistory history;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.shuffle) shuffle_rng.shuffle(perm);
        double loss_sum = 0;
        for (std::size_t b = 0; b < n_samples; b += config.batch_size) {
            const std::size_t e = std::min(b + config.batch_size, n_samples);
            const double loss = batch_loss(perm, b, e);
            if (!std::isfinite(loss))
                fail("train: non-finite loss at epoch ", epoch, ", batch ", b / config.batch_size);
            loss_sum += loss * double(e - b);
            optimizer.step(params);
        }
        history.train_loss.push_back(loss_sum / double(n_samples));
        if (val_loss) history.val_loss.push_back(val_loss());
    }
    return history;
}

} // namespace

TrainHistory train_classifier(Network& net, const Tensor& X, const std::vector<int>& y,
                              const Tensor* X_val, const std::vector<int>* y_val,
                              const TrainConfig& config) {
    const std::size_t N = X.dim(0);
    require(y.size() == N, "train_classifier: ", N, " inputs but ", y.size(), " labels");
    for (int label : y)
        require(label >= 0 && label < kNumClasses, "train_classifier: label ", label,
                " out of range");

    auto batch_loss = [&](const std::vector<std::size_t>& perm, std::size_t b, std::size_t e) {
        Tensor xb = gather_rows(X, perm, b, e);
        std::vector<int> yb(e - b);
        for (std::size_t i = b; i < e; ++i) yb[i - b] = y[perm[i]];
        Tensor logits = net.forward(xb, true);
        auto [loss, grad] = softmax_cross_entropy(logits, one_hot(yb, kNumClasses));
        net.zero_grad();
        net.backward(grad);
        return loss;
    };
    std::function<double()> val;
    if (X_val) {
        require(y_val && y_val->size() == X_val->dim(0), "train_classifier: bad validation set");
        val = [&] { return eval_classifier_loss(net, *X_val, *y_val); };
    }
    return run_training(net, N, config, batch_loss, val);
}

TrainHistory train_autoencoder(Network& net, const Tensor& X, const Tensor* X_val,
                               const TrainConfig& config) {
    const std::size_t N = X.dim(0);
    auto batch_loss = [&](const std::vector<std::size_t>& perm, std::size_t b, std::size_t e) {
        Tensor xb = gather_rows(X, perm, b, e);
        Tensor recon = net.forward(xb, true);
        auto [loss, grad] = mae_loss(recon, xb);
        net.zero_grad();
        net.backward(grad);
        return loss;
    };
    std::function<double()> val;
    if (X_val)
        val = [&] { return eval_reconstruction_loss(net, *X_val); };
    return run_training(net, N, config, batch_loss, val);
}

Tensor predict_scores(Network& net, const Tensor& X) {
    const std::size_t N = X.dim(0);
    std::vector<std::size_t> idx(N);
    std::iota(idx.begin(), idx.end(), 0);
    Tensor scores({N, std::size_t(kNumClasses)});
    constexpr std::size_t kChunk = 256;
    for (std::size_t b = 0; b < N; b += kChunk) {
        const std::size_t e = std::min(b + kChunk, N);
        Tensor p = softmax(net.forward(gather_rows(X, idx, b, e), false));
        std::copy(p.data.begin(), p.data.end(), scores.data.begin() + b * kNumClasses);
    }
    return scores;
}

Tensor encode_samples(Network& autoencoder, const Tensor& X) {
    require(autoencoder.layers.size() > kEncoderLayers,
            "encode_samples: network is not an autoencoder");
    const std::size_t N = X.dim(0);
    std::vector<std::size_t> idx(N);
    std::iota(idx.begin(), idx.end(), 0);
    Tensor out({N, kNumFeatures});
    constexpr std::size_t kChunk = 256;
    for (std::size_t b = 0; b < N; b += kChunk) {
        const std::size_t e = std::min(b + kChunk, N);
        Tensor h = autoencoder.forward_prefix(gather_rows(X, idx, b, e), false, kEncoderLayers);
        require(h.ndim() == 2 && h.dim(1) == kNumFeatures, "encode_samples: unexpected encoder output ",
                h.shape_str());
        std::copy(h.data.begin(), h.data.end(), out.data.begin() + b * kNumFeatures);
    }
    return out;
}

// ---- input assembly ----

Tensor assemble_input(InputKind kind, const std::vector<SampleDescriptor>& samples) {
    const std::size_t N = samples.size();
    const std::size_t C = kNumChannels, T = kSampleSteps;
    switch (kind) {
        case InputKind::Flat1800: {
            Tensor X({N, C * T});
            for (std::size_t i = 0; i < N; ++i)
                std::copy(samples[i].grid.begin(), samples[i].grid.end(),
                          X.data.begin() + i * C * T);
            return X;
        }
        case InputKind::Grid1d: {
            Tensor X({N, C, T});
            for (std::size_t i = 0; i < N; ++i)
                std::copy(samples[i].grid.begin(), samples[i].grid.end(),
                          X.data.begin() + i * C * T);
            return X;
        }
        case InputKind::Grid2d: {
            Tensor X({N, 1, C, T});
            for (std::size_t i = 0; i < N; ++i)
                std::copy(samples[i].grid.begin(), samples[i].grid.end(),
                          X.data.begin() + i * C * T);
            return X;
        }
        case InputKind::Seq: {
            Tensor X({N, T, C});
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t c = 0; c < C; ++c)
                    for (std::size_t t = 0; t < T; ++t)
                        X.data[(i * T + t) * C + c] = samples[i].grid[c * T + t];
            return X;
        }
        case InputKind::Stats108:
        case InputKind::Encoded108:
            fail("assemble_input: ", int(kind) == int(InputKind::Stats108) ? "Stats108" : "Encoded108",
                 " inputs are assembled from features, not raw samples");
    }
    fail("assemble_input: bad kind");
}

Tensor assemble_stats_input(const std::vector<FeatureVector108>& features) {
    Tensor X({features.size(), kNumFeatures});
    for (std::size_t i = 0; i < features.size(); ++i)
        std::copy(features[i].values.begin(), features[i].values.end(),
                  X.data.begin() + i * kNumFeatures);
    return X;
}

std::vector<int> labels_of(const std::vector<SampleDescriptor>& samples) {
    std::vector<int> y(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) y[i] = int(samples[i].label);
    return y;
}

} // namespace drowsy
