#pragma once

#include <cstdint>

#include "semcom/rng.hpp"
#include "semcom/tensor.hpp"

namespace semcom {

/// AWGN channel with unit transmit power. `noiseless` is the SNR = +inf sentinel.
struct ChannelConfig {
    double snr_db = 10.0;
    bool noiseless = false;
    std::size_t n_x = 1;   // channel symbols per source item
    std::size_t n_k = 1;   // source dimension
    std::uint64_t seed = 0;

    void validate() const;
};

/// Per-sample scaling to unit mean symbol power (the free-function twin of the
/// PowerNorm layer, for use outside a model).
Tensor power_normalize(const Tensor& x);

/// Noise variance for unit signal power: sigma^2 = 10^(-snr_db/10).
double noise_variance(double snr_db);

/// Y = X + N with N ~ iid Gaussian(0, sigma^2). Forward only; the additive
/// noise has unit Jacobian, so grad_X = grad_Y on the backward path.
Tensor awgn_transmit(const Tensor& x, const ChannelConfig& cfg, Rng& rng);

/// CR = n_x / n_k, the dimension ratio between channel input and source.
double compression_rate(std::size_t n_x, std::size_t n_k);

/// Suggested square conv kernel size w = ceil((log_alphabet_x / 5) * (1 - sqrt(cr))).
/// Config-generation helper only; nothing hard-wires it.
std::size_t suggested_kernel_size(double log_alphabet_x, double cr);

}  // namespace semcom
