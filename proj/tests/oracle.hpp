#pragma once

// Co-located reference implementation of the full training loop: one function
// computing everything both endpoints would, in the same arithmetic order and
// with the same f32 wire rounding applied at the two points where a tensor
// actually crosses the link (Y downstream, grad_Y upstream). Used to check
// that the split protocol is gradient-equivalent to monolithic training.

#include "semcom/channel.hpp"
#include "semcom/data.hpp"
#include "semcom/metrics.hpp"
#include "semcom/task/pragmatic.hpp"
#include "semcom/transmitter.hpp"
#include "semcom/wire.hpp"

namespace semcom::testutil {

struct MonolithicResult {
    task::CoderPair coders;
    std::vector<MetricsMsg> metrics;
};

inline MonolithicResult run_monolithic(task::CoderPair coders, Model phi,
                                       const Dataset& data, const ChannelConfig& channel,
                                       task::LossConfig loss, const TrainOptions& opts) {
    using namespace task;
    Adam enc_adam(opts.adam, coders.encoder.params());
    Adam dec_adam(opts.adam, coders.decoder.params());
    Rng noise_rng(channel.seed);
    bool alpha_set = loss.alpha_mode != AlphaMode::AutoFirstBatch;

    MonolithicResult out;
    double best_esd = std::numeric_limits<double>::infinity();
    std::size_t stale = 0;

    for (std::size_t epoch = 0; epoch < opts.max_epochs; ++epoch) {
        const auto batches =
            batch_indices(data.size(), opts.batch_size, opts.shuffle_seed, epoch);
        double esd_sum = 0.0, mse_sum = 0.0, iou_sum = 0.0;
        std::size_t hit = 0, labeled = 0, iou_batches = 0;

        for (const auto& idx : batches) {
            const Tensor k = stack_batch(data.images, idx);
            const Tensor x = coders.encoder.forward(k);
            const Tensor y = quantize_f32(awgn_transmit(x, channel, noise_rng));

            const Tensor k_hat = coders.decoder.forward(y);
            PragmaticTruth truth;
            truth.kind = loss.task;
            if (loss.lambda < 1.0) {
                if (loss.task == TaskKind::Discrete) {
                    for (std::size_t i : idx) truth.labels.push_back(data.labels[i]);
                } else {
                    truth.masks = stack_batch(data.masks, idx);
                }
            }
            if (!alpha_set) {
                LossConfig probe = loss;
                probe.alpha = 1.0;
                const EsdResult first = esd_batch(k, k_hat, phi, truth, probe);
                if (first.d_ob > 0.0 && first.d_pr > 0.0) loss.alpha = first.d_pr / first.d_ob;
                alpha_set = true;
            }
            const EsdResult esd = esd_batch(k, k_hat, phi, truth, loss);
            coders.decoder.zero_grad();
            const Tensor grad_y = coders.decoder.backward(esd.grad_k_hat);
            dec_adam.step(coders.decoder.params());

            coders.encoder.zero_grad();
            coders.encoder.backward(quantize_f32(grad_y));
            enc_adam.step(coders.encoder.params());

            esd_sum += esd.value;
            mse_sum += mse_loss(k_hat, k).value;
            if (loss.lambda < 1.0 && loss.task == TaskKind::Discrete) {
                const auto preds = argmax_rows(esd.z_hat);
                for (std::size_t i = 0; i < preds.size(); ++i)
                    hit += preds[i] == truth.labels[i];
                labeled += preds.size();
            } else if (loss.lambda < 1.0 && loss.task == TaskKind::Continuous) {
                iou_sum += iou(esd.z_hat, truth.masks);
                ++iou_batches;
            }
        }

        MetricsMsg report;
        report.epoch = static_cast<std::uint32_t>(epoch);
        report.esd = esd_sum / static_cast<double>(batches.size());
        report.psnr_db = psnr_from_mse(mse_sum / static_cast<double>(batches.size()));
        report.accuracy = labeled ? static_cast<double>(hit) / labeled : -1.0;
        report.iou = iou_batches ? iou_sum / iou_batches : -1.0;
        if (report.esd < best_esd - opts.min_improvement) {
            best_esd = report.esd;
            stale = 0;
        } else {
            ++stale;
        }
        if (stale >= opts.patience && epoch + 1 < opts.max_epochs) report.stop = 1;
        out.metrics.push_back(report);
        if (report.stop) break;
    }
    out.coders = std::move(coders);
    return out;
}

inline task::CoderPair clone_pair(const task::CoderPair& p) {
    task::CoderPair c;
    c.encoder = p.encoder.clone();
    c.decoder = p.decoder.clone();
    c.cr = p.cr;
    c.task = p.task;
    return c;
}

}  // namespace semcom::testutil
