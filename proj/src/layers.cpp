#include "semcom/layers.hpp"

#include <cmath>

namespace semcom {

namespace {

void init_uniform_glorot(Tensor& w, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : w.data) v = uniform(rng, -bound, bound);
}

std::size_t batch_of(const Tensor& x, std::size_t min_rank, const char* who) {
    if (x.shape.size() < min_rank)
        throw ShapeError(std::string(who) + ": expected batched input of rank >= " +
                         std::to_string(min_rank) + ", got " + shape_str(x.shape));
    return x.shape[0];
}

}  // namespace

const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Dense: return "dense";
        case LayerKind::Conv2d: return "conv2d";
        case LayerKind::Flatten: return "flatten";
        case LayerKind::Reshape: return "reshape";
        case LayerKind::Relu: return "relu";
        case LayerKind::Sigmoid: return "sigmoid";
        case LayerKind::Tanh: return "tanh";
        case LayerKind::PowerNorm: return "power_norm";
    }
    return "?";
}

// ---------------------------------------------------------------- Dense

Dense::Dense(std::size_t in_dim, std::size_t out_dim)
    : in_(in_dim), out_(out_dim), w_({in_dim, out_dim}), b_({out_dim}) {
    w_.alloc_grad();
    b_.alloc_grad();
}

Dense::Dense(std::size_t in_dim, std::size_t out_dim, Rng& rng) : Dense(in_dim, out_dim) {
    init_uniform_glorot(w_, in_, out_, rng);
}

void Dense::set_identity() {
    for (double& v : w_.data) v = 0.0;
    for (std::size_t i = 0; i < in_ && i < out_; ++i) w_.data[i * out_ + i] = 1.0;
    for (double& v : b_.data) v = 0.0;
}

Tensor Dense::forward(const Tensor& x) {
    const std::size_t batch = batch_of(x, 2, "dense");
    const std::size_t in = numel(x.shape) / batch;
    if (in != in_)
        throw ShapeError("dense: expected per-sample dim " + std::to_string(in_) +
                         ", got " + std::to_string(in) + " from " + shape_str(x.shape));
    x_ = x;
    Tensor y({batch, out_});
    for (std::size_t s = 0; s < batch; ++s)
        for (std::size_t j = 0; j < out_; ++j) {
            double acc = b_.data[j];
            for (std::size_t i = 0; i < in_; ++i)
                acc += x.data[s * in_ + i] * w_.data[i * out_ + j];
            y.data[s * out_ + j] = acc;
        }
    forward_done_ = true;
    return y;
}

Tensor Dense::backward(const Tensor& gy) {
    if (!forward_done_) throw NumericError("dense: backward before forward");
    const std::size_t batch = x_.shape[0];
    if (gy.size() != batch * out_)
        throw ShapeError("dense: upstream gradient shape " + shape_str(gy.shape) +
                         " does not match output [" + std::to_string(batch) + "," +
                         std::to_string(out_) + "]");
    Tensor gx(x_.shape);
    for (std::size_t s = 0; s < batch; ++s)
        for (std::size_t j = 0; j < out_; ++j) {
            const double g = gy.data[s * out_ + j];
            b_.grad[j] += g;
            for (std::size_t i = 0; i < in_; ++i) {
                w_.grad[i * out_ + j] += x_.data[s * in_ + i] * g;
                gx.data[s * in_ + i] += w_.data[i * out_ + j] * g;
            }
        }
    return gx;
}

std::vector<std::uint32_t> Dense::hyper() const {
    return {static_cast<std::uint32_t>(in_), static_cast<std::uint32_t>(out_)};
}

std::unique_ptr<Layer> Dense::clone() const {
    auto c = std::make_unique<Dense>(in_, out_);
    c->w_.data = w_.data;
    c->b_.data = b_.data;
    return c;
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(std::size_t in_ch, std::size_t out_ch, std::size_t kernel,
               std::size_t stride, std::size_t pad)
    : in_ch_(in_ch), out_ch_(out_ch), k_(kernel), stride_(stride), pad_(pad),
      w_({out_ch, in_ch, kernel, kernel}), b_({out_ch}) {
    w_.alloc_grad();
    b_.alloc_grad();
}

Conv2d::Conv2d(std::size_t in_ch, std::size_t out_ch, std::size_t kernel,
               std::size_t stride, std::size_t pad, Rng& rng)
    : Conv2d(in_ch, out_ch, kernel, stride, pad) {
    init_uniform_glorot(w_, in_ch * kernel * kernel, out_ch * kernel * kernel, rng);
}

Tensor Conv2d::forward(const Tensor& x) {
    batch_of(x, 4, "conv2d");
    const std::size_t B = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
    if (C != in_ch_)
        throw ShapeError("conv2d: expected " + std::to_string(in_ch_) + " input channels, got " +
                         std::to_string(C));
    if (H + 2 * pad_ < k_ || W + 2 * pad_ < k_)
        throw ShapeError("conv2d: kernel larger than padded input");
    const std::size_t OH = (H + 2 * pad_ - k_) / stride_ + 1;
    const std::size_t OW = (W + 2 * pad_ - k_) / stride_ + 1;
    x_ = x;
    Tensor y({B, out_ch_, OH, OW});
    auto xat = [&](std::size_t s, std::size_t c, long i, long j) -> double {
        i -= static_cast<long>(pad_);
        j -= static_cast<long>(pad_);
        if (i < 0 || j < 0 || i >= static_cast<long>(H) || j >= static_cast<long>(W)) return 0.0;
        return x.data[((s * C + c) * H + i) * W + j];
    };
    for (std::size_t s = 0; s < B; ++s)
        for (std::size_t oc = 0; oc < out_ch_; ++oc)
            for (std::size_t oi = 0; oi < OH; ++oi)
                for (std::size_t oj = 0; oj < OW; ++oj) {
                    double acc = b_.data[oc];
                    for (std::size_t c = 0; c < C; ++c)
                        for (std::size_t ki = 0; ki < k_; ++ki)
                            for (std::size_t kj = 0; kj < k_; ++kj)
                                acc += w_.data[((oc * C + c) * k_ + ki) * k_ + kj] *
                                       xat(s, c, oi * stride_ + ki, oj * stride_ + kj);
                    y.data[((s * out_ch_ + oc) * OH + oi) * OW + oj] = acc;
                }
    forward_done_ = true;
    return y;
}

Tensor Conv2d::backward(const Tensor& gy) {
    if (!forward_done_) throw NumericError("conv2d: backward before forward");
    const std::size_t B = x_.shape[0], C = x_.shape[1], H = x_.shape[2], W = x_.shape[3];
    const std::size_t OH = (H + 2 * pad_ - k_) / stride_ + 1;
    const std::size_t OW = (W + 2 * pad_ - k_) / stride_ + 1;
    if (gy.size() != B * out_ch_ * OH * OW)
        throw ShapeError("conv2d: upstream gradient shape " + shape_str(gy.shape));
    Tensor gx(x_.shape);
    for (std::size_t s = 0; s < B; ++s)
        for (std::size_t oc = 0; oc < out_ch_; ++oc)
            for (std::size_t oi = 0; oi < OH; ++oi)
                for (std::size_t oj = 0; oj < OW; ++oj) {
                    const double g = gy.data[((s * out_ch_ + oc) * OH + oi) * OW + oj];
                    b_.grad[oc] += g;
                    for (std::size_t c = 0; c < C; ++c)
                        for (std::size_t ki = 0; ki < k_; ++ki)
                            for (std::size_t kj = 0; kj < k_; ++kj) {
                                const long i = static_cast<long>(oi * stride_ + ki) -
                                               static_cast<long>(pad_);
                                const long j = static_cast<long>(oj * stride_ + kj) -
                                               static_cast<long>(pad_);
                                if (i < 0 || j < 0 || i >= static_cast<long>(H) ||
                                    j >= static_cast<long>(W))
                                    continue;
                                const std::size_t xi = ((s * C + c) * H + i) * W + j;
                                w_.grad[((oc * C + c) * k_ + ki) * k_ + kj] += x_.data[xi] * g;
                                gx.data[xi] += w_.data[((oc * C + c) * k_ + ki) * k_ + kj] * g;
                            }
                }
    return gx;
}

std::vector<std::uint32_t> Conv2d::hyper() const {
    return {static_cast<std::uint32_t>(in_ch_), static_cast<std::uint32_t>(out_ch_),
            static_cast<std::uint32_t>(k_), static_cast<std::uint32_t>(stride_),
            static_cast<std::uint32_t>(pad_)};
}

std::unique_ptr<Layer> Conv2d::clone() const {
    auto c = std::make_unique<Conv2d>(in_ch_, out_ch_, k_, stride_, pad_);
    c->w_.data = w_.data;
    c->b_.data = b_.data;
    return c;
}

// ---------------------------------------------------------------- shape ops

Tensor Flatten::forward(const Tensor& x) {
    const std::size_t batch = batch_of(x, 2, "flatten");
    in_shape_ = x.shape;
    Tensor y({batch, numel(x.shape) / batch}, x.data);
    forward_done_ = true;
    return y;
}

Tensor Flatten::backward(const Tensor& gy) {
    if (!forward_done_) throw NumericError("flatten: backward before forward");
    if (gy.size() != numel(in_shape_)) throw ShapeError("flatten: gradient size mismatch");
    return Tensor(in_shape_, gy.data);
}

Tensor Reshape::forward(const Tensor& x) {
    const std::size_t batch = batch_of(x, 2, "reshape");
    const std::size_t per = numel(x.shape) / batch;
    if (per != numel(target_))
        throw ShapeError("reshape: per-sample size " + std::to_string(per) +
                         " cannot be reshaped to " + shape_str(target_));
    in_shape_ = x.shape;
    Shape out{batch};
    out.insert(out.end(), target_.begin(), target_.end());
    forward_done_ = true;
    return Tensor(out, x.data);
}

Tensor Reshape::backward(const Tensor& gy) {
    if (!forward_done_) throw NumericError("reshape: backward before forward");
    if (gy.size() != numel(in_shape_)) throw ShapeError("reshape: gradient size mismatch");
    return Tensor(in_shape_, gy.data);
}

std::vector<std::uint32_t> Reshape::hyper() const {
    std::vector<std::uint32_t> h;
    for (std::size_t d : target_) h.push_back(static_cast<std::uint32_t>(d));
    return h;
}

// ---------------------------------------------------------------- activations

Tensor Relu::forward(const Tensor& x) {
    x_ = x;
    Tensor y(x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) y.data[i] = x.data[i] > 0.0 ? x.data[i] : 0.0;
    forward_done_ = true;
    return y;
}

Tensor Relu::backward(const Tensor& gy) {
    if (!forward_done_) throw NumericError("relu: backward before forward");
    Tensor gx(x_.shape);
    for (std::size_t i = 0; i < gx.size(); ++i)
        gx.data[i] = x_.data[i] > 0.0 ? gy.data[i] : 0.0;
    return gx;
}

Tensor Sigmoid::forward(const Tensor& x) {
    Tensor y(x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) y.data[i] = 1.0 / (1.0 + std::exp(-x.data[i]));
    y_ = y;
    forward_done_ = true;
    return y;
}

Tensor Sigmoid::backward(const Tensor& gy) {
    if (!forward_done_) throw NumericError("sigmoid: backward before forward");
    Tensor gx(y_.shape);
    for (std::size_t i = 0; i < gx.size(); ++i)
        gx.data[i] = gy.data[i] * y_.data[i] * (1.0 - y_.data[i]);
    return gx;
}

Tensor Tanh::forward(const Tensor& x) {
    Tensor y(x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) y.data[i] = std::tanh(x.data[i]);
    y_ = y;
    forward_done_ = true;
    return y;
}

Tensor Tanh::backward(const Tensor& gy) {
    if (!forward_done_) throw NumericError("tanh: backward before forward");
    Tensor gx(y_.shape);
    for (std::size_t i = 0; i < gx.size(); ++i)
        gx.data[i] = gy.data[i] * (1.0 - y_.data[i] * y_.data[i]);
    return gx;
}

// ---------------------------------------------------------------- PowerNorm

Tensor PowerNorm::forward(const Tensor& x) {
    const std::size_t batch = batch_of(x, 2, "power_norm");
    const std::size_t n = numel(x.shape) / batch;
    x_ = x;
    norms_.assign(batch, 0.0);
    Tensor y(x.shape);
    const double root_n = std::sqrt(static_cast<double>(n));
    for (std::size_t s = 0; s < batch; ++s) {
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) sq += x.data[s * n + i] * x.data[s * n + i];
        const double r = std::sqrt(sq);
        if (r == 0.0) throw NumericError("power_norm: all-zero sample has no defined scaling");
        norms_[s] = r;
        for (std::size_t i = 0; i < n; ++i) y.data[s * n + i] = x.data[s * n + i] * root_n / r;
    }
    forward_done_ = true;
    return y;
}

Tensor PowerNorm::backward(const Tensor& gy) {
    if (!forward_done_) throw NumericError("power_norm: backward before forward");
    const std::size_t batch = x_.shape[0];
    const std::size_t n = numel(x_.shape) / batch;
    if (gy.size() != x_.size()) throw ShapeError("power_norm: gradient size mismatch");
    Tensor gx(x_.shape);
    const double root_n = std::sqrt(static_cast<double>(n));
    // y_i = sqrt(n) x_i / r  =>  dy_i/dx_j = sqrt(n) (delta_ij / r - x_i x_j / r^3)
    for (std::size_t s = 0; s < batch; ++s) {
        const double r = norms_[s];
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += gy.data[s * n + i] * x_.data[s * n + i];
        for (std::size_t j = 0; j < n; ++j)
            gx.data[s * n + j] =
                root_n * (gy.data[s * n + j] / r - x_.data[s * n + j] * dot / (r * r * r));
    }
    return gx;
}

// ---------------------------------------------------------------- factory

std::unique_ptr<Layer> make_layer(LayerKind kind, const std::vector<std::uint32_t>& hyper) {
    switch (kind) {
        case LayerKind::Dense:
            if (hyper.size() != 2) throw ShapeError("dense layer needs 2 hyper values");
            return std::make_unique<Dense>(hyper[0], hyper[1]);
        case LayerKind::Conv2d:
            if (hyper.size() != 5) throw ShapeError("conv2d layer needs 5 hyper values");
            return std::make_unique<Conv2d>(hyper[0], hyper[1], hyper[2], hyper[3], hyper[4]);
        case LayerKind::Flatten:
            return std::make_unique<Flatten>();
        case LayerKind::Reshape: {
            Shape s;
            for (auto d : hyper) s.push_back(d);
            return std::make_unique<Reshape>(std::move(s));
        }
        case LayerKind::Relu: return std::make_unique<Relu>();
        case LayerKind::Sigmoid: return std::make_unique<Sigmoid>();
        case LayerKind::Tanh: return std::make_unique<Tanh>();
        case LayerKind::PowerNorm: return std::make_unique<PowerNorm>();
    }
    throw ShapeError("unknown layer kind tag");
}

}  // namespace semcom
