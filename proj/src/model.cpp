#include "semcom/model.hpp"

#include <cstring>

namespace semcom {

Tensor Model::forward(const Tensor& x) {
    x.check_finite("model input");
    last_input_ = x;
    Tensor cur = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        try {
            cur = layers_[i]->forward(cur);
        } catch (const ShapeError& e) {
            throw ShapeError("layer " + std::to_string(i) + " (" +
                             layer_kind_name(layers_[i]->kind()) + "): " + e.what());
        }
    }
    forward_done_ = true;
    return cur;
}

Tensor Model::forward_one(const Tensor& x) {
    Shape batched{1};
    batched.insert(batched.end(), x.shape.begin(), x.shape.end());
    Tensor y = forward(Tensor(batched, x.data));
    Shape out(y.shape.begin() + 1, y.shape.end());
    if (out.empty()) out = {1};
    return Tensor(out, y.data);
}

Tensor Model::backward(const Tensor& loss_grad) {
    if (!forward_done_) throw NumericError("model: backward before forward");
    Tensor g = loss_grad;
    for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g);
    if (g.size() != last_input_.size())
        throw ShapeError("model: input gradient size mismatch");
    return g;
}

std::vector<Tensor*> Model::params() {
    std::vector<Tensor*> out;
    for (auto& l : layers_)
        for (Tensor* p : l->params()) out.push_back(p);
    return out;
}

std::vector<const Tensor*> Model::params() const {
    std::vector<const Tensor*> out;
    for (const auto& l : layers_)
        for (Tensor* p : const_cast<Layer&>(*l).params()) out.push_back(p);
    return out;
}

void Model::zero_grad() {
    for (Tensor* p : params()) p->zero_grad();
}

Model Model::clone() const {
    Model m;
    for (const auto& l : layers_) m.add(l->clone());
    return m;
}

bool Model::activation_free() const {
    for (const auto& l : layers_)
        if (is_activation(l->kind())) return false;
    return true;
}

// ---------------------------------------------------------------- blob format

namespace {

constexpr char kMagic[4] = {'S', 'L', 'N', 'N'};
constexpr std::uint16_t kVersion = 1;

void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
    b.push_back(v & 0xff);
    b.push_back((v >> 8) & 0xff);
}

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xff);
}

void put_f32(std::vector<std::uint8_t>& b, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(b, bits);
}

struct Cursor {
    const std::vector<std::uint8_t>& b;
    std::size_t pos = 0;
    std::uint8_t u8() {
        if (pos + 1 > b.size()) throw ShapeError("model blob truncated");
        return b[pos++];
    }
    std::uint16_t u16() {
        std::uint16_t v = u8();
        return static_cast<std::uint16_t>(v | (static_cast<std::uint16_t>(u8()) << 8));
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
        return v;
    }
    float f32() {
        std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
};

}  // namespace

std::vector<std::uint8_t> serialize_model(const Model& m) {
    std::vector<std::uint8_t> b;
    b.insert(b.end(), kMagic, kMagic + 4);
    put_u16(b, kVersion);
    put_u32(b, static_cast<std::uint32_t>(m.layer_count()));
    for (std::size_t i = 0; i < m.layer_count(); ++i) {
        const Layer& l = m.layer(i);
        b.push_back(static_cast<std::uint8_t>(l.kind()));
        const auto hyper = l.hyper();
        b.push_back(static_cast<std::uint8_t>(hyper.size()));
        for (auto h : hyper) put_u32(b, h);
        auto params = const_cast<Layer&>(l).params();
        b.push_back(static_cast<std::uint8_t>(params.size()));
        for (const Tensor* p : params) {
            b.push_back(static_cast<std::uint8_t>(p->shape.size()));
            for (std::size_t d : p->shape) put_u32(b, static_cast<std::uint32_t>(d));
            for (double v : p->data) put_f32(b, static_cast<float>(v));
        }
    }
    return b;
}

Model deserialize_model(const std::vector<std::uint8_t>& blob) {
    Cursor c{blob};
    if (blob.size() < 4 || std::memcmp(blob.data(), kMagic, 4) != 0)
        throw ShapeError("model blob: bad magic");
    c.pos = 4;
    if (c.u16() != kVersion) throw ShapeError("model blob: unsupported version");
    const std::uint32_t n_layers = c.u32();
    Model m;
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        const auto kind = static_cast<LayerKind>(c.u8());
        const std::uint8_t n_hyper = c.u8();
        std::vector<std::uint32_t> hyper;
        for (std::uint8_t h = 0; h < n_hyper; ++h) hyper.push_back(c.u32());
        auto layer = make_layer(kind, hyper);
        const std::uint8_t n_params = c.u8();
        auto params = layer->params();
        if (n_params != params.size()) throw ShapeError("model blob: parameter count mismatch");
        for (Tensor* p : params) {
            const std::uint8_t rank = c.u8();
            Shape s;
            for (std::uint8_t d = 0; d < rank; ++d) s.push_back(c.u32());
            if (s != p->shape) throw ShapeError("model blob: parameter shape mismatch");
            for (double& v : p->data) v = static_cast<double>(c.f32());
        }
        m.add(std::move(layer));
    }
    if (c.pos != blob.size()) throw ShapeError("model blob: trailing bytes");
    return m;
}

}  // namespace semcom
