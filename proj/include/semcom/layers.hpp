#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "semcom/rng.hpp"
#include "semcom/tensor.hpp"

namespace semcom {

enum class LayerKind : std::uint8_t {
    Dense = 1,
    Conv2d = 2,
    Flatten = 3,
    Reshape = 4,
    Relu = 5,
    Sigmoid = 6,
    Tanh = 7,
    PowerNorm = 8,
};

const char* layer_kind_name(LayerKind k);

inline bool is_activation(LayerKind k) {
    return k == LayerKind::Relu || k == LayerKind::Sigmoid || k == LayerKind::Tanh;
}

/// One step of a sequential network. Inputs are always batched (batch dim first).
/// forward() caches what backward() needs; backward() accumulates parameter
/// gradients and returns the gradient w.r.t. the layer input.
class Layer {
public:
    virtual ~Layer() = default;
    virtual LayerKind kind() const = 0;
    virtual Tensor forward(const Tensor& x) = 0;
    virtual Tensor backward(const Tensor& gy) = 0;
    virtual std::vector<Tensor*> params() { return {}; }
    virtual std::vector<std::uint32_t> hyper() const { return {}; }
    virtual std::unique_ptr<Layer> clone() const = 0;

protected:
    bool forward_done_ = false;
};

class Dense : public Layer {
public:
    Dense(std::size_t in_dim, std::size_t out_dim);
    Dense(std::size_t in_dim, std::size_t out_dim, Rng& rng);

    LayerKind kind() const override { return LayerKind::Dense; }
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& gy) override;
    std::vector<Tensor*> params() override { return {&w_, &b_}; }
    std::vector<std::uint32_t> hyper() const override;
    std::unique_ptr<Layer> clone() const override;

    void set_identity();
    Tensor& weight() { return w_; }
    Tensor& bias() { return b_; }

private:
    std::size_t in_, out_;
    Tensor w_, b_;  // w: [in, out], b: [out]
    Tensor x_;
};

class Conv2d : public Layer {
public:
    Conv2d(std::size_t in_ch, std::size_t out_ch, std::size_t kernel,
           std::size_t stride = 1, std::size_t pad = 0);
    Conv2d(std::size_t in_ch, std::size_t out_ch, std::size_t kernel,
           std::size_t stride, std::size_t pad, Rng& rng);

    LayerKind kind() const override { return LayerKind::Conv2d; }
    Tensor forward(const Tensor& x) override;  // x: [B, C, H, W]
    Tensor backward(const Tensor& gy) override;
    std::vector<Tensor*> params() override { return {&w_, &b_}; }
    std::vector<std::uint32_t> hyper() const override;
    std::unique_ptr<Layer> clone() const override;

    Tensor& weight() { return w_; }
    Tensor& bias() { return b_; }

private:
    std::size_t in_ch_, out_ch_, k_, stride_, pad_;
    Tensor w_, b_;  // w: [OC, C, k, k], b: [OC]
    Tensor x_;
};

class Flatten : public Layer {
public:
    LayerKind kind() const override { return LayerKind::Flatten; }
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& gy) override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<Flatten>(); }

private:
    Shape in_shape_;
};

class Reshape : public Layer {
public:
    explicit Reshape(Shape per_sample_target) : target_(std::move(per_sample_target)) {}

    LayerKind kind() const override { return LayerKind::Reshape; }
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& gy) override;
    std::vector<std::uint32_t> hyper() const override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<Reshape>(target_); }

private:
    Shape target_;
    Shape in_shape_;
};

class Relu : public Layer {
public:
    LayerKind kind() const override { return LayerKind::Relu; }
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& gy) override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<Relu>(); }

private:
    Tensor x_;
};

class Sigmoid : public Layer {
public:
    LayerKind kind() const override { return LayerKind::Sigmoid; }
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& gy) override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<Sigmoid>(); }

private:
    Tensor y_;
};

class Tanh : public Layer {
public:
    LayerKind kind() const override { return LayerKind::Tanh; }
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& gy) override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<Tanh>(); }

private:
    Tensor y_;
};

/// Per-sample scaling to unit mean symbol power: x' = x * sqrt(n) / ||x||_2.
/// Parameter-free and differentiable; the terminal layer of every encoder.
class PowerNorm : public Layer {
public:
    LayerKind kind() const override { return LayerKind::PowerNorm; }
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& gy) override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<PowerNorm>(); }

private:
    Tensor x_;
    std::vector<double> norms_;
};

std::unique_ptr<Layer> make_layer(LayerKind kind, const std::vector<std::uint32_t>& hyper);

}  // namespace semcom
