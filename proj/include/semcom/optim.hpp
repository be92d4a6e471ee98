#pragma once

#include <cstdint>
#include <vector>

#include "semcom/tensor.hpp"

namespace semcom {

struct AdamConfig {
    double eta = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam with the exponential-moving-average momenta update
///   rho_t = b1 rho_{t-1} + (1-b1) g,  nu_t = b2 nu_{t-1} + (1-b2) g^2,
///   theta <- theta - eta * rho_t / sqrt(nu_t + eps).
/// Note: no bias correction terms.
class Adam {
public:
    Adam(AdamConfig cfg, const std::vector<Tensor*>& params);

    /// Consumes params[i]->grad; on NaN/Inf gradients throws and leaves
    /// parameters and momenta untouched.
    void step(const std::vector<Tensor*>& params);

    std::uint64_t steps() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    std::vector<std::vector<double>> rho_, nu_;
    std::uint64_t t_ = 0;
};

}  // namespace semcom
