#include "semcom/task/pragmatic.hpp"

#include <algorithm>
#include <cmath>

namespace semcom::task {

LossValue softmax_cross_entropy(const Tensor& logits, const std::vector<std::size_t>& labels) {
    if (logits.shape.size() != 2)
        throw ShapeError("softmax_cross_entropy: expected [B,C] logits, got " +
                         shape_str(logits.shape));
    logits.check_finite("softmax_cross_entropy logits");
    const std::size_t B = logits.shape[0], C = logits.shape[1];
    if (labels.size() != B)
        throw ShapeError("softmax_cross_entropy: batch " + std::to_string(B) + " vs " +
                         std::to_string(labels.size()) + " labels");
    LossValue out{0.0, Tensor(logits.shape)};
    for (std::size_t s = 0; s < B; ++s) {
        if (labels[s] >= C)
            throw ShapeError("softmax_cross_entropy: label " + std::to_string(labels[s]) +
                             " out of range for " + std::to_string(C) + " classes");
        double mx = logits.data[s * C];
        for (std::size_t j = 1; j < C; ++j) mx = std::max(mx, logits.data[s * C + j]);
        double denom = 0.0;
        for (std::size_t j = 0; j < C; ++j) denom += std::exp(logits.data[s * C + j] - mx);
        const double log_denom = std::log(denom);
        out.value += (log_denom - (logits.data[s * C + labels[s]] - mx)) / B;
        for (std::size_t j = 0; j < C; ++j) {
            const double p = std::exp(logits.data[s * C + j] - mx) / denom;
            out.grad.data[s * C + j] = (p - (j == labels[s] ? 1.0 : 0.0)) / B;
        }
    }
    return out;
}

void LossConfig::validate() const {
    if (lambda < 0.0 || lambda > 1.0) throw NumericError("loss: lambda outside [0,1]");
    if (alpha <= 0.0) throw NumericError("loss: alpha must be positive");
}

double lambda_s(double cr) {
    if (cr < 0.0 || cr > 1.0) throw NumericError("lambda_s: cr outside [0,1]");
    return 1.0 - cr;
}

SdResult semantic_distortion(const TrainingSample& t, const LossConfig& cfg) {
    cfg.validate();
    if (!t.k.same_shape(t.k_hat))
        throw ShapeError("semantic_distortion: k/k_hat shape mismatch");
    SdResult r;
    r.grad_k_hat = Tensor(t.k_hat.shape);
    if (cfg.lambda > 0.0) {
        LossValue ob = mse_loss(t.k_hat, t.k);
        r.d_ob = ob.value;
        for (std::size_t i = 0; i < ob.grad.size(); ++i)
            r.grad_k_hat.data[i] = cfg.lambda * cfg.alpha * ob.grad.data[i];
    }
    if (cfg.lambda < 1.0) {
        if (cfg.task == TaskKind::Discrete) {
            Tensor logits({1, t.z_hat.size()}, t.z_hat.data);
            LossValue pr = softmax_cross_entropy(logits, {t.z_label});
            r.d_pr = pr.value;
            r.grad_z_hat = Tensor(t.z_hat.shape, pr.grad.data);
        } else {
            LossValue pr = mse_loss(t.z_hat, t.z_mask);
            r.d_pr = pr.value;
            r.grad_z_hat = pr.grad;
        }
        for (double& g : r.grad_z_hat.data) g *= (1.0 - cfg.lambda);
    }
    r.value = cfg.lambda * cfg.alpha * r.d_ob + (1.0 - cfg.lambda) * r.d_pr;
    return r;
}

EsdResult esd_batch(const Tensor& k, const Tensor& k_hat, Model& phi,
                    const PragmaticTruth& truth, const LossConfig& cfg) {
    cfg.validate();
    if (!k.same_shape(k_hat)) throw ShapeError("esd_batch: k/k_hat shape mismatch");
    if (k.shape.empty() || k.shape[0] == 0) throw ShapeError("esd_batch: empty batch");
    const std::size_t B = k.shape[0];

    EsdResult r;
    r.grad_k_hat = Tensor(k_hat.shape);
    if (cfg.lambda > 0.0) {
        LossValue ob = mse_loss(k_hat, k);
        r.d_ob = ob.value;
        for (std::size_t i = 0; i < ob.grad.size(); ++i)
            r.grad_k_hat.data[i] = cfg.lambda * cfg.alpha * ob.grad.data[i];
    }
    if (cfg.lambda < 1.0) {
        r.z_hat = phi.forward(k_hat);
        LossValue pr;
        if (cfg.task == TaskKind::Discrete) {
            if (truth.labels.size() != B)
                throw ShapeError("esd_batch: label count does not match batch");
            pr = softmax_cross_entropy(r.z_hat, truth.labels);
        } else {
            if (!truth.masks.same_shape(r.z_hat))
                throw ShapeError("esd_batch: mask shape does not match pragmatic output");
            pr = mse_loss(r.z_hat, truth.masks);
        }
        r.d_pr = pr.value;
        for (double& g : pr.grad.data) g *= (1.0 - cfg.lambda);
        // Chain through the frozen phi back to k_hat; phi's own parameter
        // gradients are discarded.
        phi.zero_grad();
        Tensor g_k_hat = phi.backward(pr.grad);
        phi.zero_grad();
        for (std::size_t i = 0; i < r.grad_k_hat.size(); ++i)
            r.grad_k_hat.data[i] += g_k_hat.data[i];
    }
    r.value = cfg.lambda * cfg.alpha * r.d_ob + (1.0 - cfg.lambda) * r.d_pr;
    return r;
}

Tensor pragmatic_apply(Model& phi, const Tensor& k_hat) { return phi.forward(k_hat); }

std::vector<std::size_t> argmax_rows(const Tensor& logits) {
    if (logits.shape.size() != 2) throw ShapeError("argmax_rows: expected [B,C]");
    const std::size_t B = logits.shape[0], C = logits.shape[1];
    std::vector<std::size_t> out(B);
    for (std::size_t s = 0; s < B; ++s) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < C; ++j)
            if (logits.data[s * C + j] > logits.data[s * C + best]) best = j;
        out[s] = best;
    }
    return out;
}

PragmaticTrainReport train_pragmatic(Model& phi, const Dataset& data, std::size_t epochs,
                                     const AdamConfig& adam_cfg, std::uint64_t seed,
                                     std::size_t batch_size) {
    if (data.labels.size() != data.images.size())
        throw NumericError("train_pragmatic: dataset has no labels");
    Adam adam(adam_cfg, phi.params());
    for (std::size_t e = 0; e < epochs; ++e) {
        for (const auto& idx : batch_indices(data.size(), batch_size, seed, e)) {
            const Tensor x = stack_batch(data.images, idx);
            std::vector<std::size_t> labels;
            for (std::size_t i : idx) labels.push_back(data.labels[i]);
            const Tensor logits = phi.forward(x);
            LossValue ce = softmax_cross_entropy(logits, labels);
            phi.zero_grad();
            phi.backward(ce.grad);
            adam.step(phi.params());
        }
    }
    // report training-set accuracy
    std::vector<std::size_t> idx(data.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const Tensor logits = phi.forward(stack_batch(data.images, idx));
    const auto preds = argmax_rows(logits);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) hit += preds[i] == data.labels[i];
    return {static_cast<double>(hit) / static_cast<double>(data.size()), epochs};
}

void CoderPair::validate() const {
    if (!encoder.activation_free() || !decoder.activation_free())
        throw NumericError("coders must not contain activation layers");
    if (encoder.layer_count() == 0 ||
        encoder.layer(encoder.layer_count() - 1).kind() != LayerKind::PowerNorm)
        throw NumericError("encoder must terminate in a power_norm layer");
    if (cr <= 0.0 || cr > 1.0) throw NumericError("coders: cr outside (0,1]");
}

PretrainReport pretrain_reconstruction(CoderPair& pair, const Dataset& data,
                                       const ChannelConfig& channel, std::size_t epochs,
                                       const AdamConfig& adam_cfg, std::uint64_t shuffle_seed,
                                       std::size_t batch_size) {
    pair.validate();
    channel.validate();
    Adam adam_enc(adam_cfg, pair.encoder.params());
    Adam adam_dec(adam_cfg, pair.decoder.params());
    Rng noise_rng(channel.seed);
    PretrainReport rep;
    bool first = true;
    double last = 0.0;
    for (std::size_t e = 0; e < epochs; ++e) {
        double epoch_mse = 0.0;
        const auto batches = batch_indices(data.size(), batch_size, shuffle_seed, e);
        for (const auto& idx : batches) {
            const Tensor k = stack_batch(data.images, idx);
            const Tensor x = pair.encoder.forward(k);
            const Tensor y = awgn_transmit(x, channel, noise_rng);
            const Tensor k_hat = pair.decoder.forward(y);
            LossValue ob = mse_loss(k_hat, k);
            if (first) {
                rep.initial_mse = ob.value;
                first = false;
            }
            epoch_mse += ob.value;
            pair.decoder.zero_grad();
            const Tensor grad_y = pair.decoder.backward(ob.grad);
            adam_dec.step(pair.decoder.params());
            pair.encoder.zero_grad();
            pair.encoder.backward(grad_y);  // channel is identity on the backward path
            adam_enc.step(pair.encoder.params());
        }
        last = epoch_mse / static_cast<double>(batches.size());
    }
    rep.final_mse = last;
    rep.encoder_blob = serialize_model(pair.encoder);
    return rep;
}

}  // namespace semcom::task
