#pragma once

#include "semcom/tensor.hpp"

namespace semcom {

struct LossValue {
    double value;
    Tensor grad;  // w.r.t. the first argument
};

/// Mean squared error over all elements; grad w.r.t. `a` is 2(a-b)/N.
LossValue mse_loss(const Tensor& a, const Tensor& b);

}  // namespace semcom
