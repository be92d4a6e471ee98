#include "semcom/task/session.hpp"

#include <exception>
#include <thread>

#include "semcom/metrics.hpp"

namespace semcom::task {

SessionResult run_training(CoderPair coders, Model phi, const Dataset& library,
                           const ChannelConfig& channel, LossConfig loss, TrainOptions opts,
                           TransportKind transport, std::uint16_t tcp_port,
                           std::size_t pretrain_epochs) {
    coders.validate();
    loss.validate();

    std::vector<std::uint8_t> handoff;
    if (pretrain_epochs > 0) {
        ChannelConfig local = channel;
        local.seed = channel.seed ^ 0x70726574ULL;  // independent local noise stream
        const PretrainReport rep = pretrain_reconstruction(
            coders, library, local, pretrain_epochs, opts.adam, opts.shuffle_seed);
        handoff = rep.encoder_blob;
        opts.expect_pretrained = true;
    }

    Transmitter tx(std::move(coders.encoder), library.images, channel, opts);
    Receiver rx(std::move(coders.decoder), std::move(phi), library, loss, opts);
    if (!handoff.empty()) rx.set_encoder_handoff(std::move(handoff));

    std::unique_ptr<ByteStream> tx_stream, rx_stream;
    if (transport == TransportKind::Inproc) {
        auto pair = make_inproc_pair();
        tx_stream = std::move(pair.first);
        rx_stream = std::move(pair.second);
    } else {
        TcpListener listener(tcp_port);
        const std::uint16_t port = listener.port();
        std::thread dialer([&] { tx_stream = tcp_connect("127.0.0.1", port); });
        rx_stream = listener.accept();
        dialer.join();
    }

    std::exception_ptr rx_err;
    std::thread rx_thread([&] {
        try {
            rx.run(*rx_stream);
        } catch (...) {
            rx_err = std::current_exception();
        }
    });
    std::exception_ptr tx_err;
    try {
        tx.run(*tx_stream);
    } catch (...) {
        tx_err = std::current_exception();
    }
    tx_stream.reset();  // unblocks the receiver if the transmitter died early
    rx_thread.join();
    if (tx_err) std::rethrow_exception(tx_err);
    if (rx_err) std::rethrow_exception(rx_err);

    SessionResult result;
    result.coders.encoder = std::move(tx.encoder());
    result.coders.decoder = std::move(rx.decoder());
    result.epoch_metrics = rx.epoch_metrics();
    return result;
}

EvalResult evaluate(CoderPair& coders, Model& phi, const Dataset& data,
                    const ChannelConfig& channel, std::size_t batch_size) {
    channel.validate();
    Rng noise_rng(channel.seed);
    double mse_sum = 0.0, iou_sum = 0.0;
    std::size_t hit = 0, labeled = 0, iou_count = 0, batches = 0;
    for (const auto& idx : batch_indices(data.size(), batch_size, 0, 0)) {
        const Tensor k = stack_batch(data.images, idx);
        const Tensor x = coders.encoder.forward(k);
        const Tensor y = awgn_transmit(x, channel, noise_rng);
        const Tensor k_hat = coders.decoder.forward(y);
        mse_sum += mse_loss(k_hat, k).value;
        ++batches;
        if (coders.task == TaskKind::Discrete && !data.labels.empty()) {
            const auto preds = argmax_rows(pragmatic_apply(phi, k_hat));
            for (std::size_t i = 0; i < idx.size(); ++i)
                hit += preds[i] == data.labels[idx[i]];
            labeled += idx.size();
        } else if (coders.task == TaskKind::Continuous && !data.masks.empty()) {
            iou_sum += iou(pragmatic_apply(phi, k_hat), stack_batch(data.masks, idx));
            ++iou_count;
        }
    }
    EvalResult r;
    r.psnr_db = psnr_from_mse(mse_sum / static_cast<double>(batches));
    if (labeled) r.accuracy = static_cast<double>(hit) / labeled;
    if (iou_count) r.mean_iou = iou_sum / iou_count;
    return r;
}

}  // namespace semcom::task
