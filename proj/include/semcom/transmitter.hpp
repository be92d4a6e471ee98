#pragma once

#include <cstdint>
#include <vector>

#include "semcom/channel.hpp"
#include "semcom/data.hpp"
#include "semcom/model.hpp"
#include "semcom/optim.hpp"
#include "semcom/transport.hpp"

namespace semcom {

/// Knobs shared by both protocol endpoints. Both sides must be constructed
/// with identical values; batching is derived deterministically from
/// shuffle_seed, so no sample indices travel on the wire.
struct TrainOptions {
    std::size_t max_epochs = 200;
    std::size_t batch_size = 32;
    std::uint64_t shuffle_seed = 1;
    AdamConfig adam{};
    std::size_t patience = 10;       // epochs without ESD improvement before stopping
    double min_improvement = 1e-5;
    bool expect_pretrained = false;  // wait for an EncoderParams handoff first
};

/// Transmitter endpoint of the receiver-leading training protocol.
///
/// Holds the encoder and the unlabeled library images only; learns from the
/// {grad_Y, Y} feedback without ever seeing the task. The AWGN channel is
/// simulated at this boundary, so the peer observes Y only.
class Transmitter {
public:
    Transmitter(Model encoder, std::vector<Tensor> library_images, ChannelConfig channel,
                TrainOptions opts);

    /// Runs the full training session over the given stream (lock-step:
    /// DataBatch out, Feedback in, once per batch; MetricsReport in per epoch).
    void run(ByteStream& stream);

    Model& encoder() { return encoder_; }
    const Model& encoder() const { return encoder_; }

private:
    Model encoder_;
    std::vector<Tensor> images_;
    ChannelConfig channel_;
    TrainOptions opts_;
};

}  // namespace semcom
