#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semcom/task/receiver.hpp"
#include "semcom/transmitter.hpp"

namespace semcom::task {

enum class TransportKind { Inproc, Tcp };

struct SessionResult {
    CoderPair coders;
    std::vector<MetricsMsg> epoch_metrics;
};

/// Runs the receiver-leading training protocol end to end: spawns the two
/// endpoints concurrently over the chosen transport (in-process duplex queue,
/// or a localhost TCP socket pair with the receiver listening) and returns
/// the trained coders plus the per-epoch metrics log.
///
/// pretrain_epochs > 0 first runs receiver-local reconstruction pretraining
/// and hands the encoder parameters to the transmitter as the session's first
/// message.
SessionResult run_training(CoderPair coders, Model phi, const Dataset& library,
                           const ChannelConfig& channel, LossConfig loss, TrainOptions opts,
                           TransportKind transport = TransportKind::Inproc,
                           std::uint16_t tcp_port = 0, std::size_t pretrain_epochs = 0);

struct EvalResult {
    double accuracy = -1.0;
    double psnr_db = 0.0;
    double mean_iou = -1.0;
};

/// Frozen coders over the channel on a held-out dataset (co-located).
EvalResult evaluate(CoderPair& coders, Model& phi, const Dataset& data,
                    const ChannelConfig& channel, std::size_t batch_size = 64);

}  // namespace semcom::task
