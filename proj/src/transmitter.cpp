#include "semcom/transmitter.hpp"

#include "semcom/wire.hpp"

namespace semcom {

Transmitter::Transmitter(Model encoder, std::vector<Tensor> library_images,
                         ChannelConfig channel, TrainOptions opts)
    : encoder_(std::move(encoder)), images_(std::move(library_images)),
      channel_(channel), opts_(opts) {
    channel_.validate();
    if (images_.empty()) throw NumericError("transmitter: empty library dataset");
}

void Transmitter::run(ByteStream& stream) {
    if (opts_.expect_pretrained) {
        const Frame f = read_frame(stream);
        encoder_ = deserialize_model(unpack_encoder_params(f));
    }
    if (opts_.max_epochs == 0) return;

    Adam adam(opts_.adam, encoder_.params());
    Rng noise_rng(channel_.seed);

    for (std::size_t epoch = 0; epoch < opts_.max_epochs; ++epoch) {
        const auto batches =
            batch_indices(images_.size(), opts_.batch_size, opts_.shuffle_seed, epoch);
        for (std::size_t b = 0; b < batches.size(); ++b) {
            const Tensor k = stack_batch(images_, batches[b]);
            const Tensor x = encoder_.forward(k);
            const Tensor y = awgn_transmit(x, channel_, noise_rng);

            DataBatchMsg out;
            out.epoch = static_cast<std::uint32_t>(epoch);
            out.batch_id = static_cast<std::uint32_t>(b);
            out.y = y;  // f32 on the wire
            write_frame(stream, pack(out));

            const FeedbackMsg fb = unpack_feedback(read_frame(stream));
            if (fb.epoch != out.epoch || fb.batch_id != out.batch_id)
                throw ProtocolError("feedback ids (" + std::to_string(fb.epoch) + "," +
                                    std::to_string(fb.batch_id) + ") do not match batch (" +
                                    std::to_string(out.epoch) + "," +
                                    std::to_string(out.batch_id) + ")");
            // grad_X = grad_Y: the additive channel has unit Jacobian, and the
            // forward activations for this batch are still cached in the encoder.
            encoder_.zero_grad();
            encoder_.backward(fb.grad_y);
            adam.step(encoder_.params());
        }
        const MetricsMsg report = unpack_metrics(read_frame(stream));
        if (report.epoch != epoch) throw ProtocolError("metrics report epoch mismatch");
        if (report.stop) break;
    }
}

}  // namespace semcom
