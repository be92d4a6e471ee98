#pragma once

#include <cstdint>

#include "semcom/data.hpp"
#include "semcom/model.hpp"
#include "semcom/optim.hpp"

namespace semcom::task {

/// CycleGAN bundle for data adaptation. G_K maps observed-domain samples into
/// the library domain (the only piece needed at inference); G_S maps back.
/// Discriminators emit one sigmoid probability per sample.
struct CganBundle {
    Model g_k;
    Model g_s;
    Model d_k;
    Model d_s;
};

/// Adversarial loss E[log D(real)] + E[log(1 - D(G(source)))], batch-estimated.
/// Discriminator outputs are clamped away from {0,1} by 1e-7 before the log.
double gan_loss(Model& g, Model& d, const Tensor& real_batch, const Tensor& source_batch);

/// E||G_K(G_S(K)) - K||_1 + E||G_S(G_K(S)) - S||_1 (per-sample L1, batch mean).
double cycle_loss(Model& g_k, Model& g_s, const Tensor& k_batch, const Tensor& s_batch);

/// Unweighted total objective: gan_loss_S + gan_loss_K + cycle_loss.
double cgan_total(CganBundle& b, const Tensor& k_batch, const Tensor& s_batch);

struct CganTrainOptions {
    std::size_t epochs = 300;
    std::size_t batch_size = 16;  // V in the alternating update loop
    double cycle_weight = 10.0;   // training-time weight on the cycle term
    AdamConfig adam{.eta = 1e-3};
    double disc_lr_scale = 0.1;   // discriminator lr relative to the generators
    std::uint64_t seed = 1;
};

/// Alternating minimax training: generators descend the objective,
/// discriminators ascend it. Entirely transmitter-local; no protocol traffic.
void train_cgan(CganBundle& bundle, const Dataset& lib, const Dataset& obs,
                const CganTrainOptions& opts);

/// G_K(s) for one [H,W] observed sample; deterministic. When lib_shape is
/// given the output is reshaped to the library-domain sample shape.
Tensor adapt(Model& g_k, const Tensor& s, const Shape& lib_shape = {});

/// Batched variant ([B, n] in, [B, n] out).
Tensor adapt_batch(Model& g_k, const Tensor& s_batch);

}  // namespace semcom::task
