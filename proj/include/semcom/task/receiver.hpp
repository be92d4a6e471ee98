#pragma once

#include <vector>

#include "semcom/task/pragmatic.hpp"
#include "semcom/transmitter.hpp"  // TrainOptions
#include "semcom/transport.hpp"
#include "semcom/wire.hpp"

namespace semcom::task {

/// Receiver endpoint: owns the decoder, the frozen pragmatic model phi, the
/// library data K and the task ground truth Z (never shared with the peer).
/// Leads the session: computes the loss, updates the decoder, and feeds back
/// {grad_Y, Y} on the noiseless reverse path.
class Receiver {
public:
    Receiver(Model decoder, Model phi, Dataset library, LossConfig loss, TrainOptions opts);

    /// Optional pretraining handoff: blob sent as the first message of run().
    void set_encoder_handoff(std::vector<std::uint8_t> blob);

    void run(ByteStream& stream);

    Model& decoder() { return decoder_; }
    const Model& decoder() const { return decoder_; }
    const LossConfig& loss() const { return loss_; }
    const std::vector<MetricsMsg>& epoch_metrics() const { return metrics_; }

private:
    Model decoder_;
    Model phi_;
    Dataset data_;
    LossConfig loss_;
    TrainOptions opts_;
    std::vector<std::uint8_t> handoff_blob_;
    std::vector<MetricsMsg> metrics_;
};

}  // namespace semcom::task
