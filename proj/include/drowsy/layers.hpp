#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "drowsy/rng.hpp"
#include "drowsy/tensor.hpp"

namespace drowsy {

struct ParamRef {
    std::string name;
    Tensor* value;
    Tensor* grad;
};

// Serializable layer description: kind plus numeric attributes. Checkpoints
// store these and rebuild layers through make_layer().
struct LayerSpec {
    std::string kind;
    std::vector<std::pair<std::string, double>> attrs;

    double attr(const std::string& key) const;
};

// A layer owns its parameters and caches whatever the backward pass needs.
// backward() accumulates into parameter grads and returns the input grad.
class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& x, bool train) = 0;
    virtual Tensor backward(const Tensor& grad_out) = 0;
    virtual std::vector<ParamRef> params(const std::string& prefix) { return {}; }
    virtual void init_params(Rng&) {}
    virtual LayerSpec spec() const = 0;
    virtual void seed_dropout(std::uint64_t) {}
};

class Dense : public Layer {
public:
    Dense(std::size_t in, std::size_t out);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<ParamRef> params(const std::string& prefix) override;
    void init_params(Rng& rng) override;
    LayerSpec spec() const override;

    Tensor weight, bias, grad_weight, grad_bias;

private:
    std::size_t in_, out_;
    Tensor x_cache_;
};

class LeakyReLU : public Layer {
public:
    explicit LeakyReLU(double slope = 0.01) : slope_(slope) {}
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& grad_out) override;
    LayerSpec spec() const override;

private:
    double slope_;
    Tensor x_cache_;
};

// Strided valid cross-correlation over [batch, C_in, L].
class Conv1D : public Layer {
public:
    Conv1D(std::size_t c_in, std::size_t c_out, std::size_t kernel, std::size_t stride);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<ParamRef> params(const std::string& prefix) override;
    void init_params(Rng& rng) override;
    LayerSpec spec() const override;

    Tensor kernels, bias, grad_kernels, grad_bias; // kernels: [C_out, C_in, K]

private:
    std::size_t c_in_, c_out_, kernel_, stride_;
    Tensor cols_cache_; // im2col matrix [B*L_out, C_in*K]
    std::vector<std::size_t> x_shape_;
};

// Strided valid cross-correlation over [batch, C_in, H, W].
class Conv2D : public Layer {
public:
    Conv2D(std::size_t c_in, std::size_t c_out, std::size_t kh, std::size_t kw,
           std::size_t sh, std::size_t sw);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<ParamRef> params(const std::string& prefix) override;
    void init_params(Rng& rng) override;
    LayerSpec spec() const override;

    Tensor kernels, bias, grad_kernels, grad_bias; // kernels: [C_out, C_in, Kh, Kw]

private:
    std::size_t c_in_, c_out_, kh_, kw_, sh_, sw_;
    Tensor cols_cache_;
    std::vector<std::size_t> x_shape_;
};

// Single LSTM block over [batch, T, F]; gates i, f, g, o with logistic/tanh
// nonlinearities, zero initial states, exact BPTT. Emits the full hidden
// sequence [batch, T, H], or only the last hidden state [batch, H] when
// return_sequences is false.
class LSTM : public Layer {
public:
    LSTM(std::size_t input_size, std::size_t hidden_size, bool return_sequences);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<ParamRef> params(const std::string& prefix) override;
    void init_params(Rng& rng) override;
    LayerSpec spec() const override;

    Tensor w_input, w_hidden, bias;           // [F,4H], [H,4H], [4H]
    Tensor grad_w_input, grad_w_hidden, grad_bias;

private:
    std::size_t input_size_, hidden_size_;
    bool return_sequences_;
    Tensor x_cache_;
    // Per-step caches, each [B, H] flattened: gates, cell, tanh(cell), hidden.
    std::vector<std::vector<double>> gate_i_, gate_f_, gate_g_, gate_o_, cell_, tanh_cell_, hidden_;
    std::size_t batch_ = 0, steps_ = 0;
};

// Inverted dropout: train mode zeroes with probability rate and scales
// survivors by 1/(1-rate); eval mode is the identity.
class Dropout : public Layer {
public:
    explicit Dropout(double rate);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& grad_out) override;
    LayerSpec spec() const override;
    void seed_dropout(std::uint64_t seed) override { rng_ = Rng(seed); }

private:
    double rate_;
    Rng rng_;
    std::vector<double> mask_;
    bool train_pass_ = false;
};

// Mean over all spatial positions: [batch, C, ...spatial] -> [batch, C].
class GlobalAvgPool : public Layer {
public:
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& grad_out) override;
    LayerSpec spec() const override;

private:
    std::vector<std::size_t> x_shape_;
};

std::unique_ptr<Layer> make_layer(const LayerSpec& spec);

// ---- losses ----

struct LossResult {
    double loss = 0;
    Tensor grad; // d loss / d first argument
};

// Row-wise max-subtracted softmax.
Tensor softmax(const Tensor& logits);

Tensor one_hot(const std::vector<int>& labels, std::size_t n_classes);

// Mean over the batch of -sum(target * log softmax(logits)); grad is
// (softmax - target) / batch.
LossResult softmax_cross_entropy(const Tensor& logits, const Tensor& one_hot_targets);

// Mean absolute error over all elements; grad is sign(pred - target) / N.
LossResult mae_loss(const Tensor& pred, const Tensor& target);

} // namespace drowsy
