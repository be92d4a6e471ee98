#include "semcom/optim.hpp"

#include <cmath>

namespace semcom {

Adam::Adam(AdamConfig cfg, const std::vector<Tensor*>& params) : cfg_(cfg) {
    if (cfg_.epsilon <= 0.0) throw NumericError("adam: epsilon must be positive");
    if (cfg_.beta1 < 0.0 || cfg_.beta1 >= 1.0 || cfg_.beta2 < 0.0 || cfg_.beta2 >= 1.0)
        throw NumericError("adam: beta values must be in [0,1)");
    for (const Tensor* p : params) {
        rho_.emplace_back(p->size(), 0.0);
        nu_.emplace_back(p->size(), 0.0);
    }
}

void Adam::step(const std::vector<Tensor*>& params) {
    if (params.size() != rho_.size())
        throw ShapeError("adam: parameter set does not match optimizer state");
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (params[k]->grad.size() != params[k]->size())
            throw ShapeError("adam: missing gradient for parameter " + std::to_string(k));
        for (double g : params[k]->grad)
            if (!std::isfinite(g)) throw NumericError("adam: non-finite gradient");
    }
    ++t_;
    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& p = *params[k];
        auto& rho = rho_[k];
        auto& nu = nu_[k];
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double g = p.grad[i];
            rho[i] = cfg_.beta1 * rho[i] + (1.0 - cfg_.beta1) * g;
            nu[i] = cfg_.beta2 * nu[i] + (1.0 - cfg_.beta2) * g * g;
            p.data[i] -= cfg_.eta * rho[i] / std::sqrt(nu[i] + cfg_.epsilon);
        }
    }
}

}  // namespace semcom
