#pragma once

#include <cstdint>
#include <vector>

#include "semcom/channel.hpp"
#include "semcom/data.hpp"
#include "semcom/losses.hpp"
#include "semcom/model.hpp"
#include "semcom/optim.hpp"

// Everything in semcom::task is receiver-private: pragmatic losses, labels,
// and the models that consume them. The transmitter endpoint must never link
// symbols from this namespace (checked by the acceptance suite).
namespace semcom::task {

enum class TaskKind { Discrete, Continuous };

/// Mean softmax cross entropy over a [B,C] logit batch against class indices.
/// Numerically stabilized by max subtraction; grad is (softmax - onehot)/B.
LossValue softmax_cross_entropy(const Tensor& logits, const std::vector<std::size_t>& labels);

enum class AlphaMode { Fixed, AutoFirstBatch };

/// Weighted semantic-distortion configuration:
///   L = lambda * alpha * D_ob(K, K_hat) + (1 - lambda) * D_pr(Z, Z_hat).
/// D_ob is MSE; D_pr is cross entropy for discrete tasks and MSE for
/// continuous ones (both penalty terms enter with a plus sign).
struct LossConfig {
    double lambda = 0.5;
    double alpha = 1.0;
    AlphaMode alpha_mode = AlphaMode::Fixed;
    TaskKind task = TaskKind::Discrete;

    void validate() const;
};

/// Default initial tradeoff weight lambda_s = 1 - CR.
double lambda_s(double cr);

/// The tuple T = (K, K_hat, Z, Z_hat). For discrete tasks z is a class index
/// and z_hat the logit vector; for continuous tasks both are mask tensors.
struct TrainingSample {
    Tensor k;
    Tensor k_hat;
    std::size_t z_label = 0;
    Tensor z_mask;
    Tensor z_hat;
};

struct SdResult {
    double value = 0.0;
    double d_ob = 0.0;
    double d_pr = 0.0;
    Tensor grad_k_hat;  // of the lambda*alpha*D_ob term
    Tensor grad_z_hat;  // of the (1-lambda)*D_pr term
};

SdResult semantic_distortion(const TrainingSample& t, const LossConfig& cfg);

/// Batch ground truth for the pragmatic task.
struct PragmaticTruth {
    TaskKind kind = TaskKind::Discrete;
    std::vector<std::size_t> labels;  // discrete
    Tensor masks;                     // continuous, batch-stacked [B, n]
};

struct EsdResult {
    double value = 0.0;
    double d_ob = 0.0;
    double d_pr = 0.0;
    Tensor grad_k_hat;  // full gradient, pragmatic term chained through phi
    Tensor z_hat;       // logits [B,C] or masks [B,n]; empty when lambda == 1
};

/// Batch-mean semantic distortion with the pragmatic term chained through the
/// (frozen) pragmatic model phi. With lambda == 1, phi and the ground truth
/// are never touched.
EsdResult esd_batch(const Tensor& k, const Tensor& k_hat, Model& phi,
                    const PragmaticTruth& truth, const LossConfig& cfg);

/// phi(k_hat); phi receives no parameter updates from this call.
Tensor pragmatic_apply(Model& phi, const Tensor& k_hat);

std::vector<std::size_t> argmax_rows(const Tensor& logits);

struct PragmaticTrainReport {
    double train_accuracy = 0.0;
    std::size_t epochs_run = 0;
};

/// Supervised training of the pragmatic function on ground-truth labels
/// (receiver-local, happens before any coder training).
PragmaticTrainReport train_pragmatic(Model& phi, const Dataset& data, std::size_t epochs,
                                     const AdamConfig& adam, std::uint64_t seed,
                                     std::size_t batch_size = 32);

/// Encoder f_theta1 + decoder g_theta2. Coder networks carry no activation
/// layers; the encoder terminates in a power normalization layer.
struct CoderPair {
    Model encoder;
    Model decoder;
    double cr = 1.0;
    TaskKind task = TaskKind::Discrete;

    void validate() const;
};

struct PretrainReport {
    double initial_mse = 0.0;
    double final_mse = 0.0;
    std::vector<std::uint8_t> encoder_blob;  // parameter handoff for the transmitter
};

/// Receiver-local reconstruction pretraining: minimizes E[D_ob(K, K_hat)]
/// only (the lambda = 1 path) and emits the encoder parameter blob.
PretrainReport pretrain_reconstruction(CoderPair& pair, const Dataset& data,
                                       const ChannelConfig& channel, std::size_t epochs,
                                       const AdamConfig& adam, std::uint64_t shuffle_seed,
                                       std::size_t batch_size = 32);

}  // namespace semcom::task
