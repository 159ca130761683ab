#include "drowsy/layers.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace drowsy {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;
using StridedCMap = Eigen::Map<const RowMat, Eigen::Unaligned, Eigen::OuterStride<>>;
using StridedMap = Eigen::Map<RowMat, Eigen::Unaligned, Eigen::OuterStride<>>;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Glorot uniform: +-sqrt(6 / (fan_in + fan_out)).
void glorot_init(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / double(fan_in + fan_out));
    for (auto& v : t.data) v = rng.uniform(-limit, limit);
}

} // namespace

double LayerSpec::attr(const std::string& key) const {
    for (const auto& [k, v] : attrs)
        if (k == key) return v;
    fail("layer spec '", kind, "': missing attribute '", key, "'");
}

// ---- Dense ----

Dense::Dense(std::size_t in, std::size_t out)
    : weight({in, out}), bias({out}), grad_weight({in, out}), grad_bias({out}),
      in_(in), out_(out) {}

void Dense::init_params(Rng& rng) {
    glorot_init(weight, in_, out_, rng);
    bias.fill(0.0);
}

Tensor Dense::forward(const Tensor& x, bool) {
    require(x.ndim() == 2 && x.dim(1) == in_, "dense: expected [batch, ", in_, "], got ",
            x.shape_str());
    x_cache_ = x;
    const std::size_t B = x.dim(0);
    Tensor y({B, out_});
    MapMat(y.data.data(), B, out_).noalias() =
        CMapMat(x.data.data(), B, in_) * CMapMat(weight.data.data(), in_, out_);
    MapMat ym(y.data.data(), B, out_);
    ym.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.data.data(), out_);
    return y;
}

Tensor Dense::backward(const Tensor& grad_out) {
    const std::size_t B = x_cache_.dim(0);
    require(grad_out.ndim() == 2 && grad_out.dim(0) == B && grad_out.dim(1) == out_,
            "dense backward: bad grad shape ", grad_out.shape_str());
    CMapMat dy(grad_out.data.data(), B, out_);
    CMapMat x(x_cache_.data.data(), B, in_);
    MapMat(grad_weight.data.data(), in_, out_).noalias() += x.transpose() * dy;
    Eigen::Map<Eigen::RowVectorXd>(grad_bias.data.data(), out_) += dy.colwise().sum();
    Tensor dx({B, in_});
    MapMat(dx.data.data(), B, in_).noalias() =
        dy * CMapMat(weight.data.data(), in_, out_).transpose();
    return dx;
}

std::vector<ParamRef> Dense::params(const std::string& prefix) {
    return {{prefix + ".W", &weight, &grad_weight}, {prefix + ".b", &bias, &grad_bias}};
}

LayerSpec Dense::spec() const {
    return {"dense", {{"in", double(in_)}, {"out", double(out_)}}};
}

// ---- LeakyReLU ----

Tensor LeakyReLU::forward(const Tensor& x, bool) {
    x_cache_ = x;
    Tensor y = x;
    for (auto& v : y.data)
        if (v < 0) v *= slope_;
    return y;
}

Tensor LeakyReLU::backward(const Tensor& grad_out) {
    require_same_shape(grad_out, x_cache_, "leaky_relu backward");
    Tensor dx = grad_out;
    for (std::size_t i = 0; i < dx.data.size(); ++i)
        if (x_cache_.data[i] <= 0) dx.data[i] *= slope_; // subgradient slope at 0
    return dx;
}

LayerSpec LeakyReLU::spec() const { return {"leaky_relu", {{"slope", slope_}}}; }

// ---- Conv1D ----

Conv1D::Conv1D(std::size_t c_in, std::size_t c_out, std::size_t kernel, std::size_t stride)
    : kernels({c_out, c_in, kernel}), bias({c_out}), grad_kernels({c_out, c_in, kernel}),
      grad_bias({c_out}), c_in_(c_in), c_out_(c_out), kernel_(kernel), stride_(stride) {
    require(kernel >= 1 && stride >= 1, "conv1d: kernel and stride must be >= 1");
}

void Conv1D::init_params(Rng& rng) {
    glorot_init(kernels, c_in_ * kernel_, c_out_ * kernel_, rng);
    bias.fill(0.0);
}

Tensor Conv1D::forward(const Tensor& x, bool) {
    require(x.ndim() == 3 && x.dim(1) == c_in_, "conv1d: expected [batch, ", c_in_,
            ", L], got ", x.shape_str());
    const std::size_t B = x.dim(0), L = x.dim(2);
    require(L >= kernel_, "conv1d: input length ", L, " shorter than kernel ", kernel_);
    const std::size_t L_out = (L - kernel_) / stride_ + 1;
    const std::size_t patch = c_in_ * kernel_;

    x_shape_ = x.shape;
    cols_cache_ = Tensor({B * L_out, patch});
    double* cols = cols_cache_.data.data();
    for (std::size_t b = 0; b < B; ++b) {
        const double* xb = x.data.data() + b * c_in_ * L;
        for (std::size_t p = 0; p < L_out; ++p) {
            double* row = cols + (b * L_out + p) * patch;
            const std::size_t base = p * stride_;
            for (std::size_t c = 0; c < c_in_; ++c)
                for (std::size_t k = 0; k < kernel_; ++k) row[c * kernel_ + k] = xb[c * L + base + k];
        }
    }

    RowMat y2(B * L_out, c_out_);
    y2.noalias() = CMapMat(cols, B * L_out, patch) *
                   CMapMat(kernels.data.data(), c_out_, patch).transpose();
    y2.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.data.data(), c_out_);

    Tensor y({B, c_out_, L_out});
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t co = 0; co < c_out_; ++co)
            for (std::size_t p = 0; p < L_out; ++p)
                y.data[(b * c_out_ + co) * L_out + p] = y2(b * L_out + p, co);
    return y;
}

Tensor Conv1D::backward(const Tensor& grad_out) {
    const std::size_t B = x_shape_[0], L = x_shape_[2];
    const std::size_t L_out = (L - kernel_) / stride_ + 1;
    const std::size_t patch = c_in_ * kernel_;
    require(grad_out.shape == std::vector<std::size_t>({B, c_out_, L_out}),
            "conv1d backward: bad grad shape ", grad_out.shape_str());

    RowMat dy2(B * L_out, c_out_);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t co = 0; co < c_out_; ++co)
            for (std::size_t p = 0; p < L_out; ++p)
                dy2(b * L_out + p, co) = grad_out.data[(b * c_out_ + co) * L_out + p];

    MapMat(grad_kernels.data.data(), c_out_, patch).noalias() +=
        dy2.transpose() * CMapMat(cols_cache_.data.data(), B * L_out, patch);
    Eigen::Map<Eigen::RowVectorXd>(grad_bias.data.data(), c_out_) += dy2.colwise().sum();

    RowMat dcols(B * L_out, patch);
    dcols.noalias() = dy2 * CMapMat(kernels.data.data(), c_out_, patch);

    Tensor dx(x_shape_);
    for (std::size_t b = 0; b < B; ++b) {
        double* dxb = dx.data.data() + b * c_in_ * L;
        for (std::size_t p = 0; p < L_out; ++p) {
            const std::size_t base = p * stride_;
            for (std::size_t c = 0; c < c_in_; ++c)
                for (std::size_t k = 0; k < kernel_; ++k)
                    dxb[c * L + base + k] += dcols(b * L_out + p, c * kernel_ + k);
        }
    }
    return dx;
}

std::vector<ParamRef> Conv1D::params(const std::string& prefix) {
    return {{prefix + ".W", &kernels, &grad_kernels}, {prefix + ".b", &bias, &grad_bias}};
}

LayerSpec Conv1D::spec() const {
    return {"conv1d",
            {{"c_in", double(c_in_)}, {"c_out", double(c_out_)}, {"kernel", double(kernel_)},
             {"stride", double(stride_)}}};
}

// ---- Conv2D ----

Conv2D::Conv2D(std::size_t c_in, std::size_t c_out, std::size_t kh, std::size_t kw,
               std::size_t sh, std::size_t sw)
    : kernels({c_out, c_in, kh, kw}), bias({c_out}), grad_kernels({c_out, c_in, kh, kw}),
      grad_bias({c_out}), c_in_(c_in), c_out_(c_out), kh_(kh), kw_(kw), sh_(sh), sw_(sw) {
    require(kh >= 1 && kw >= 1 && sh >= 1 && sw >= 1, "conv2d: kernel and strides must be >= 1");
}

void Conv2D::init_params(Rng& rng) {
    glorot_init(kernels, c_in_ * kh_ * kw_, c_out_ * kh_ * kw_, rng);
    bias.fill(0.0);
}

Tensor Conv2D::forward(const Tensor& x, bool) {
    require(x.ndim() == 4 && x.dim(1) == c_in_, "conv2d: expected [batch, ", c_in_,
            ", H, W], got ", x.shape_str());
    const std::size_t B = x.dim(0), H = x.dim(2), W = x.dim(3);
    require(H >= kh_ && W >= kw_, "conv2d: kernel ", kh_, "x", kw_, " larger than input ", H,
            "x", W);
    const std::size_t H_out = (H - kh_) / sh_ + 1;
    const std::size_t W_out = (W - kw_) / sw_ + 1;
    const std::size_t patch = c_in_ * kh_ * kw_;
    const std::size_t P = H_out * W_out;

    x_shape_ = x.shape;
    cols_cache_ = Tensor({B * P, patch});
    double* cols = cols_cache_.data.data();
    for (std::size_t b = 0; b < B; ++b) {
        const double* xb = x.data.data() + b * c_in_ * H * W;
        for (std::size_t ho = 0; ho < H_out; ++ho) {
            for (std::size_t wo = 0; wo < W_out; ++wo) {
                double* row = cols + (b * P + ho * W_out + wo) * patch;
                for (std::size_t c = 0; c < c_in_; ++c)
                    for (std::size_t kh = 0; kh < kh_; ++kh)
                        for (std::size_t kw = 0; kw < kw_; ++kw)
                            row[(c * kh_ + kh) * kw_ + kw] =
                                xb[c * H * W + (ho * sh_ + kh) * W + wo * sw_ + kw];
            }
        }
    }

    RowMat y2(B * P, c_out_);
    y2.noalias() = CMapMat(cols, B * P, patch) *
                   CMapMat(kernels.data.data(), c_out_, patch).transpose();
    y2.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.data.data(), c_out_);

    Tensor y({B, c_out_, H_out, W_out});
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t co = 0; co < c_out_; ++co)
            for (std::size_t p = 0; p < P; ++p)
                y.data[(b * c_out_ + co) * P + p] = y2(b * P + p, co);
    return y;
}

Tensor Conv2D::backward(const Tensor& grad_out) {
    const std::size_t B = x_shape_[0], H = x_shape_[2], W = x_shape_[3];
    const std::size_t H_out = (H - kh_) / sh_ + 1;
    const std::size_t W_out = (W - kw_) / sw_ + 1;
    const std::size_t patch = c_in_ * kh_ * kw_;
    const std::size_t P = H_out * W_out;
    require(grad_out.shape == std::vector<std::size_t>({B, c_out_, H_out, W_out}),
            "conv2d backward: bad grad shape ", grad_out.shape_str());

    RowMat dy2(B * P, c_out_);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t co = 0; co < c_out_; ++co)
            for (std::size_t p = 0; p < P; ++p) dy2(b * P + p, co) = grad_out.data[(b * c_out_ + co) * P + p];

    MapMat(grad_kernels.data.data(), c_out_, patch).noalias() +=
        dy2.transpose() * CMapMat(cols_cache_.data.data(), B * P, patch);
    Eigen::Map<Eigen::RowVectorXd>(grad_bias.data.data(), c_out_) += dy2.colwise().sum();

    RowMat dcols(B * P, patch);
    dcols.noalias() = dy2 * CMapMat(kernels.data.data(), c_out_, patch);

    Tensor dx(x_shape_);
    for (std::size_t b = 0; b < B; ++b) {
        double* dxb = dx.data.data() + b * c_in_ * H * W;
        for (std::size_t ho = 0; ho < H_out; ++ho)
            for (std::size_t wo = 0; wo < W_out; ++wo) {
                const double* row = dcols.row(b * P + ho * W_out + wo).data();
                for (std::size_t c = 0; c < c_in_; ++c)
                    for (std::size_t kh = 0; kh < kh_; ++kh)
                        for (std::size_t kw = 0; kw < kw_; ++kw)
                            dxb[c * H * W + (ho * sh_ + kh) * W + wo * sw_ + kw] +=
                                row[(c * kh_ + kh) * kw_ + kw];
            }
    }
    return dx;
}

std::vector<ParamRef> Conv2D::params(const std::string& prefix) {
    return {{prefix + ".W", &kernels, &grad_kernels}, {prefix + ".b", &bias, &grad_bias}};
}

LayerSpec Conv2D::spec() const {
    return {"conv2d",
            {{"c_in", double(c_in_)}, {"c_out", double(c_out_)}, {"kh", double(kh_)},
             {"kw", double(kw_)}, {"sh", double(sh_)}, {"sw", double(sw_)}}};
}

// ---- LSTM ----

LSTM::LSTM(std::size_t input_size, std::size_t hidden_size, bool return_sequences)
    : w_input({input_size, 4 * hidden_size}), w_hidden({hidden_size, 4 * hidden_size}),
      bias({4 * hidden_size}), grad_w_input({input_size, 4 * hidden_size}),
      grad_w_hidden({hidden_size, 4 * hidden_size}), grad_bias({4 * hidden_size}),
      input_size_(input_size), hidden_size_(hidden_size), return_sequences_(return_sequences) {}

void LSTM::init_params(Rng& rng) {
    const double limit = 1.0 / std::sqrt(double(hidden_size_));
    for (auto& v : w_input.data) v = rng.uniform(-limit, limit);
    for (auto& v : w_hidden.data) v = rng.uniform(-limit, limit);
    bias.fill(0.0);
    // Forget-gate bias 1 (gate order i, f, g, o).
    for (std::size_t h = 0; h < hidden_size_; ++h) bias.data[hidden_size_ + h] = 1.0;
}

Tensor LSTM::forward(const Tensor& x, bool) {
    require(x.ndim() == 3 && x.dim(2) == input_size_, "lstm: expected [batch, T, ", input_size_,
            "], got ", x.shape_str());
    const std::size_t B = x.dim(0), T = x.dim(1), H = hidden_size_;
    require(T >= 1, "lstm: empty sequence");
    x_cache_ = x;
    batch_ = B;
    steps_ = T;

    auto grid = [&](std::vector<std::vector<double>>& v) {
        v.assign(T, std::vector<double>(B * H, 0.0));
    };
    grid(gate_i_);
    grid(gate_f_);
    grid(gate_g_);
    grid(gate_o_);
    grid(cell_);
    grid(tanh_cell_);
    hidden_.assign(T + 1, std::vector<double>(B * H, 0.0)); // hidden_[0] is h_{-1} = 0

    RowMat z(B, 4 * H);
    RowMat c_prev = RowMat::Zero(B, H);
    CMapMat wx(w_input.data.data(), input_size_, 4 * H);
    CMapMat wh(w_hidden.data.data(), H, 4 * H);
    const Eigen::Map<const Eigen::RowVectorXd> b(bias.data.data(), 4 * H);

    for (std::size_t t = 0; t < T; ++t) {
        StridedCMap xt(x.data.data() + t * input_size_, B, input_size_,
                       Eigen::OuterStride<>(Eigen::Index(T * input_size_)));
        CMapMat h_prev(hidden_[t].data(), B, H);
        z.noalias() = xt * wx;
        z.noalias() += h_prev * wh;
        z.rowwise() += b;

        for (std::size_t r = 0; r < B; ++r) {
            for (std::size_t h = 0; h < H; ++h) {
                const double zi = z(r, h);
                const double zf = z(r, H + h);
                const double zg = z(r, 2 * H + h);
                const double zo = z(r, 3 * H + h);
                const double i = sigmoid(zi);
                const double f = sigmoid(zf);
                const double g = std::tanh(zg);
                const double o = sigmoid(zo);
                const double c = f * c_prev(r, h) + i * g;
                const double tc = std::tanh(c);
                gate_i_[t][r * H + h] = i;
                gate_f_[t][r * H + h] = f;
                gate_g_[t][r * H + h] = g;
                gate_o_[t][r * H + h] = o;
                cell_[t][r * H + h] = c;
                tanh_cell_[t][r * H + h] = tc;
                hidden_[t + 1][r * H + h] = o * tc;
                c_prev(r, h) = c;
            }
        }
    }

    if (return_sequences_) {
        Tensor y({B, T, H});
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t r = 0; r < B; ++r)
                for (std::size_t h = 0; h < H; ++h)
                    y.data[(r * T + t) * H + h] = hidden_[t + 1][r * H + h];
        return y;
    }
    Tensor y({B, H});
    y.data = hidden_[T];
    return y;
}

Tensor LSTM::backward(const Tensor& grad_out) {
    const std::size_t B = batch_, T = steps_, H = hidden_size_, F = input_size_;
    if (return_sequences_)
        require(grad_out.shape == std::vector<std::size_t>({B, T, H}),
                "lstm backward: bad grad shape ", grad_out.shape_str());
    else
        require(grad_out.shape == std::vector<std::size_t>({B, H}),
                "lstm backward: bad grad shape ", grad_out.shape_str());

    CMapMat wx(w_input.data.data(), F, 4 * H);
    CMapMat wh(w_hidden.data.data(), H, 4 * H);
    MapMat dwx(grad_w_input.data.data(), F, 4 * H);
    MapMat dwh(grad_w_hidden.data.data(), H, 4 * H);
    Eigen::Map<Eigen::RowVectorXd> db(grad_bias.data.data(), 4 * H);

    Tensor dx(x_cache_.shape);
    RowMat dh = RowMat::Zero(B, H);  // gradient flowing from step t+1 into h_t
    RowMat dc = RowMat::Zero(B, H);  // gradient flowing from step t+1 into c_t
    RowMat dz(B, 4 * H);

    for (std::size_t t = T; t-- > 0;) {
        if (return_sequences_) {
            for (std::size_t r = 0; r < B; ++r)
                for (std::size_t h = 0; h < H; ++h) dh(r, h) += grad_out.data[(r * T + t) * H + h];
        } else if (t == T - 1) {
            for (std::size_t r = 0; r < B; ++r)
                for (std::size_t h = 0; h < H; ++h) dh(r, h) += grad_out.data[r * H + h];
        }

        for (std::size_t r = 0; r < B; ++r) {
            for (std::size_t h = 0; h < H; ++h) {
                const std::size_t idx = r * H + h;
                const double i = gate_i_[t][idx];
                const double f = gate_f_[t][idx];
                const double g = gate_g_[t][idx];
                const double o = gate_o_[t][idx];
                const double tc = tanh_cell_[t][idx];
                const double c_prev = t > 0 ? cell_[t - 1][idx] : 0.0;

                const double dht = dh(r, h);
                double dct = dc(r, h) + dht * o * (1.0 - tc * tc);

                dz(r, 3 * H + h) = dht * tc * o * (1.0 - o);       // o gate
                dz(r, h) = dct * g * i * (1.0 - i);                // i gate
                dz(r, H + h) = dct * c_prev * f * (1.0 - f);       // f gate
                dz(r, 2 * H + h) = dct * i * (1.0 - g * g);        // candidate
                dc(r, h) = dct * f;                                // into c_{t-1}
            }
        }

        StridedCMap xt(x_cache_.data.data() + t * F, B, F,
                       Eigen::OuterStride<>(Eigen::Index(T * F)));
        CMapMat h_prev(hidden_[t].data(), B, H);
        dwx.noalias() += xt.transpose() * dz;
        dwh.noalias() += h_prev.transpose() * dz;
        db += dz.colwise().sum();

        StridedMap dxt(dx.data.data() + t * F, B, F, Eigen::OuterStride<>(Eigen::Index(T * F)));
        dxt.noalias() = dz * wx.transpose();
        dh.noalias() = dz * wh.transpose();
    }
    return dx;
}

std::vector<ParamRef> LSTM::params(const std::string& prefix) {
    return {{prefix + ".Wx", &w_input, &grad_w_input},
            {prefix + ".Wh", &w_hidden, &grad_w_hidden},
            {prefix + ".b", &bias, &grad_bias}};
}

LayerSpec LSTM::spec() const {
    return {"lstm",
            {{"in", double(input_size_)}, {"hidden", double(hidden_size_)},
             {"return_sequences", return_sequences_ ? 1.0 : 0.0}}};
}

// ---- Dropout ----

Dropout::Dropout(double rate) : rate_(rate) {
    require(rate >= 0.0 && rate < 1.0, "dropout: rate must be in [0, 1), got ", rate);
}

Tensor Dropout::forward(const Tensor& x, bool train) {
    train_pass_ = train && rate_ > 0.0;
    if (!train_pass_) return x;
    const double keep = 1.0 - rate_;
    const double scale = 1.0 / keep;
    mask_.resize(x.numel());
    Tensor y = x;
    for (std::size_t i = 0; i < y.data.size(); ++i) {
        mask_[i] = rng_.bernoulli(keep) ? scale : 0.0;
        y.data[i] *= mask_[i];
    }
    return y;
}

Tensor Dropout::backward(const Tensor& grad_out) {
    if (!train_pass_) return grad_out;
    require(grad_out.numel() == mask_.size(), "dropout backward: shape mismatch");
    Tensor dx = grad_out;
    for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] *= mask_[i];
    return dx;
}

LayerSpec Dropout::spec() const { return {"dropout", {{"rate", rate_}}}; }

// ---- GlobalAvgPool ----

Tensor GlobalAvgPool::forward(const Tensor& x, bool) {
    require(x.ndim() >= 3, "global_avg_pool: expected [batch, C, ...spatial], got ",
            x.shape_str());
    x_shape_ = x.shape;
    const std::size_t B = x.dim(0), C = x.dim(1);
    const std::size_t spatial = x.numel() / (B * C);
    Tensor y({B, C});
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t c = 0; c < C; ++c) {
            const double* p = x.data.data() + (b * C + c) * spatial;
            double sum = 0;
            for (std::size_t s = 0; s < spatial; ++s) sum += p[s];
            y.data[b * C + c] = sum / double(spatial);
        }
    return y;
}

Tensor GlobalAvgPool::backward(const Tensor& grad_out) {
    const std::size_t B = x_shape_[0], C = x_shape_[1];
    require(grad_out.shape == std::vector<std::size_t>({B, C}),
            "global_avg_pool backward: bad grad shape ", grad_out.shape_str());
    const std::size_t spatial = Tensor::numel_of(x_shape_) / (B * C);
    Tensor dx(x_shape_);
    const double inv = 1.0 / double(spatial);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t c = 0; c < C; ++c) {
            const double g = grad_out.data[b * C + c] * inv;
            double* p = dx.data.data() + (b * C + c) * spatial;
            for (std::size_t s = 0; s < spatial; ++s) p[s] = g;
        }
    return dx;
}

LayerSpec GlobalAvgPool::spec() const { return {"global_avg_pool", {}}; }

// ---- factory ----

std::unique_ptr<Layer> make_layer(const LayerSpec& spec) {
    auto sz = [&](const char* key) { return std::size_t(spec.attr(key)); };
    if (spec.kind == "dense") return std::make_unique<Dense>(sz("in"), sz("out"));
    if (spec.kind == "leaky_relu") return std::make_unique<LeakyReLU>(spec.attr("slope"));
    if (spec.kind == "conv1d")
        return std::make_unique<Conv1D>(sz("c_in"), sz("c_out"), sz("kernel"), sz("stride"));
    if (spec.kind == "conv2d")
        return std::make_unique<Conv2D>(sz("c_in"), sz("c_out"), sz("kh"), sz("kw"), sz("sh"),
                                        sz("sw"));
    if (spec.kind == "lstm")
        return std::make_unique<LSTM>(sz("in"), sz("hidden"), spec.attr("return_sequences") != 0);
    if (spec.kind == "dropout") return std::make_unique<Dropout>(spec.attr("rate"));
    if (spec.kind == "global_avg_pool") return std::make_unique<GlobalAvgPool>();
    fail("make_layer: unknown layer kind '", spec.kind, "'");
}

// ---- losses ----

Tensor softmax(const Tensor& logits) {
    require(logits.ndim() == 2, "softmax: expected [batch, classes], got ", logits.shape_str());
    const std::size_t B = logits.dim(0), K = logits.dim(1);
    Tensor p = logits;
    for (std::size_t b = 0; b < B; ++b) {
        double* row = p.data.data() + b * K;
        double mx = row[0];
        for (std::size_t k = 1; k < K; ++k) mx = std::max(mx, row[k]);
        double sum = 0;
        for (std::size_t k = 0; k < K; ++k) {
            row[k] = std::exp(row[k] - mx);
            sum += row[k];
        }
        for (std::size_t k = 0; k < K; ++k) row[k] /= sum;
    }
    return p;
}

Tensor one_hot(const std::vector<int>& labels, std::size_t n_classes) {
    Tensor t({labels.size(), n_classes});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        require(labels[i] >= 0 && std::size_t(labels[i]) < n_classes, "one_hot: label ",
                labels[i], " out of range");
        t.data[i * n_classes + labels[i]] = 1.0;
    }
    return t;
}

LossResult softmax_cross_entropy(const Tensor& logits, const Tensor& one_hot_targets) {
    require_same_shape(logits, one_hot_targets, "softmax_cross_entropy");
    const std::size_t B = logits.dim(0), K = logits.dim(1);
    Tensor p = softmax(logits);
    double loss = 0;
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t k = 0; k < K; ++k) {
            const double t = one_hot_targets.data[b * K + k];
            if (t != 0) loss -= t * std::log(std::max(p.data[b * K + k], 1e-300));
        }
    loss /= double(B);

    Tensor grad = p;
    for (std::size_t i = 0; i < grad.data.size(); ++i)
        grad.data[i] = (grad.data[i] - one_hot_targets.data[i]) / double(B);
    return {loss, std::move(grad)};
}

LossResult mae_loss(const Tensor& pred, const Tensor& target) {
    require_same_shape(pred, target, "mae_loss");
    const double n = double(pred.numel());
    double loss = 0;
    Tensor grad(pred.shape);
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const double d = pred.data[i] - target.data[i];
        loss += std::abs(d);
        grad.data[i] = d > 0 ? 1.0 / n : (d < 0 ? -1.0 / n : 0.0);
    }
    return {loss / n, std::move(grad)};
}

} // namespace drowsy
