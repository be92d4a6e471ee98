#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace semcom {

/// Shape/size mismatch at an operation boundary.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-finite values or other numeric contract violations.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

/// Dense n-dimensional real array, row-major, with an optional gradient slot.
struct Tensor {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty, or same length as data

    Tensor() = default;

    explicit Tensor(Shape s) : shape(std::move(s)), data(numel(shape), 0.0) {}

    Tensor(Shape s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != numel(shape))
            throw ShapeError("tensor data length " + std::to_string(data.size()) +
                             " does not match shape " + shape_str(shape));
    }

    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    std::size_t size() const { return data.size(); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    void alloc_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
    }

    void zero_grad() { grad.assign(data.size(), 0.0); }

    void check_finite(const char* where) const {
        for (double v : data)
            if (!std::isfinite(v))
                throw NumericError(std::string("non-finite value in ") + where);
    }
};

/// Round every value through 32-bit float precision (the wire representation).
inline Tensor quantize_f32(const Tensor& t) {
    Tensor out(t.shape);
    for (std::size_t i = 0; i < t.size(); ++i)
        out.data[i] = static_cast<double>(static_cast<float>(t.data[i]));
    return out;
}

}  // namespace semcom
