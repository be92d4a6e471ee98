#include "semcom/losses.hpp"

namespace semcom {

LossValue mse_loss(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b))
        throw ShapeError("mse_loss: shapes " + shape_str(a.shape) + " vs " + shape_str(b.shape));
    a.check_finite("mse_loss a");
    b.check_finite("mse_loss b");
    const double n = static_cast<double>(a.size());
    LossValue out{0.0, Tensor(a.shape)};
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        out.value += d * d / n;
        out.grad.data[i] = 2.0 * d / n;
    }
    return out;
}

}  // namespace semcom
