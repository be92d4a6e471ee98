#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "semcom/layers.hpp"
#include "semcom/tensor.hpp"

namespace semcom {

/// Ordered layer list. An empty model is the identity map.
class Model {
public:
    Model() = default;
    Model(Model&&) = default;
    Model& operator=(Model&&) = default;

    Model& add(std::unique_ptr<Layer> l) {
        layers_.push_back(std::move(l));
        return *this;
    }

    std::size_t layer_count() const { return layers_.size(); }
    Layer& layer(std::size_t i) { return *layers_[i]; }
    const Layer& layer(std::size_t i) const { return *layers_[i]; }

    /// Batched forward pass (batch dim first); records activations for backward.
    Tensor forward(const Tensor& x);

    /// Single-sample convenience: wraps x in a batch of one and squeezes the result.
    Tensor forward_one(const Tensor& x);

    /// Accumulates parameter gradients and returns the gradient w.r.t. the input.
    Tensor backward(const Tensor& loss_grad);

    std::vector<Tensor*> params();
    std::vector<const Tensor*> params() const;
    void zero_grad();

    Model clone() const;

    /// True when every non-terminal layer is free of activation kinds
    /// (coder networks carry no activations; see CoderPair).
    bool activation_free() const;

private:
    std::vector<std::unique_ptr<Layer>> layers_;
    bool forward_done_ = false;
    Tensor last_input_;
};

/// Flat binary parameter blob: magic "SLNN", version u16 LE, layer count u32 LE,
/// then per layer: kind u8 | hyper count u8 | hyper u32 LE each |
/// param count u8 | per param: rank u8 | dims u32 LE each | f32 LE data.
std::vector<std::uint8_t> serialize_model(const Model& m);
Model deserialize_model(const std::vector<std::uint8_t>& blob);

}  // namespace semcom
