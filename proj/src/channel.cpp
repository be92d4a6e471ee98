#include "semcom/channel.hpp"

#include <cmath>

namespace semcom {

void ChannelConfig::validate() const {
    if (n_x < 1 || n_k < 1) throw NumericError("channel: dimensions must be >= 1");
    if (n_x > n_k) throw NumericError("channel: n_x must not exceed n_k");
    if (!noiseless && !std::isfinite(snr_db)) throw NumericError("channel: snr_db not finite");
}

Tensor power_normalize(const Tensor& x) {
    if (x.shape.size() < 2) throw ShapeError("power_normalize: expected batched input");
    const std::size_t batch = x.shape[0];
    const std::size_t n = numel(x.shape) / batch;
    Tensor y(x.shape);
    const double root_n = std::sqrt(static_cast<double>(n));
    for (std::size_t s = 0; s < batch; ++s) {
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) sq += x.data[s * n + i] * x.data[s * n + i];
        if (sq == 0.0) throw NumericError("power_normalize: all-zero sample");
        const double scale = root_n / std::sqrt(sq);
        for (std::size_t i = 0; i < n; ++i) y.data[s * n + i] = x.data[s * n + i] * scale;
    }
    return y;
}

double noise_variance(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

Tensor awgn_transmit(const Tensor& x, const ChannelConfig& cfg, Rng& rng) {
    x.check_finite("awgn_transmit input");
    if (cfg.noiseless) return x;
    const double sigma = std::sqrt(noise_variance(cfg.snr_db));
    Tensor y(x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) y.data[i] = x.data[i] + sigma * gauss(rng);
    return y;
}

double compression_rate(std::size_t n_x, std::size_t n_k) {
    if (n_x < 1 || n_k < 1) throw NumericError("compression_rate: dimensions must be positive");
    return static_cast<double>(n_x) / static_cast<double>(n_k);
}

std::size_t suggested_kernel_size(double log_alphabet_x, double cr) {
    if (cr < 0.0 || cr > 1.0) throw NumericError("suggested_kernel_size: cr outside [0,1]");
    const double w = std::ceil(log_alphabet_x / 5.0 * (1.0 - std::sqrt(cr)));
    return w < 1.0 ? 1 : static_cast<std::size_t>(w);
}

}  // namespace semcom
