#pragma once

#include <limits>
#include <vector>

#include "semcom/tensor.hpp"

namespace semcom {

/// 10 log10(1 / MSE) for images in [0,1]; equal inputs report +inf.
double psnr(const Tensor& a, const Tensor& b);

inline double psnr_from_mse(double mse) {
    if (mse <= 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

double accuracy(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& labels);

/// Intersection-over-union of two masks after thresholding at 0.5.
/// Both masks empty counts as perfect agreement (1.0).
double iou(const Tensor& mask_a, const Tensor& mask_b);

}  // namespace semcom
