#include "semcom/metrics.hpp"

#include <cmath>

namespace semcom {

double psnr(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b))
        throw ShapeError("psnr: shapes " + shape_str(a.shape) + " vs " + shape_str(b.shape));
    double mse = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.size());
    return psnr_from_mse(mse);
}

double accuracy(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& labels) {
    if (preds.size() != labels.size() || preds.empty())
        throw ShapeError("accuracy: prediction/label length mismatch");
    std::size_t hit = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) hit += preds[i] == labels[i];
    return static_cast<double>(hit) / static_cast<double>(preds.size());
}

double iou(const Tensor& mask_a, const Tensor& mask_b) {
    if (!mask_a.same_shape(mask_b)) throw ShapeError("iou: shape mismatch");
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < mask_a.size(); ++i) {
        const bool a = mask_a.data[i] >= 0.5;
        const bool b = mask_b.data[i] >= 0.5;
        inter += a && b;
        uni += a || b;
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace semcom
