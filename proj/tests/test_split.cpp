#include <doctest.h>

#include <memory>
#include <thread>

#include "oracle.hpp"
#include "semcom/task/session.hpp"
#include "test_util.hpp"

using namespace semcom;
using namespace semcom::task;
using namespace semcom::testutil;

namespace {

CoderPair small_coders(std::size_t n_k, std::size_t n_x, std::uint64_t seed) {
    Rng rng(seed);
    CoderPair p;
    p.encoder.add(std::make_unique<Dense>(n_k, n_x, rng));
    p.encoder.add(std::make_unique<PowerNorm>());
    p.decoder.add(std::make_unique<Dense>(n_x, n_k, rng));
    p.cr = compression_rate(n_x, n_k);
    return p;
}

Model small_phi(std::size_t n_k, std::size_t classes, std::uint64_t seed) {
    Rng rng(seed);
    Model phi;
    phi.add(std::make_unique<Dense>(n_k, classes, rng));
    return phi;
}

std::vector<double> flat_params(const Model& m) {
    std::vector<double> out;
    for (const Tensor* p : m.params()) out.insert(out.end(), p->data.begin(), p->data.end());
    return out;
}

}  // namespace

TEST_CASE("run_training with max_epochs=0 returns initial coders and empty metrics") {
    const Dataset d = synth_dataset(SynthKind::TwoClassDigits8x8, 16, 1);
    CoderPair p = small_coders(64, 16, 3);
    const auto before_enc = serialize_model(p.encoder);
    ChannelConfig ch;
    ch.noiseless = true;
    ch.n_x = 16;
    ch.n_k = 64;
    TrainOptions opts;
    opts.max_epochs = 0;
    LossConfig loss;
    loss.lambda = 1.0;
    const auto result = run_training(std::move(p), Model{}, d, ch, loss, opts);
    CHECK(result.epoch_metrics.empty());
    CHECK(serialize_model(result.coders.encoder) == before_enc);
}

TEST_CASE("split protocol matches the monolithic oracle") {
    const Dataset d = synth_dataset(SynthKind::TwoClassDigits8x8, 24, 2);
    for (std::uint64_t seed : {11ull, 12ull}) {
        CoderPair p = small_coders(64, 16, seed);
        Model phi = small_phi(64, 2, seed + 100);
        ChannelConfig ch;
        ch.snr_db = 10.0;
        ch.n_x = 16;
        ch.n_k = 64;
        ch.seed = seed;
        TrainOptions opts;
        opts.max_epochs = 3;
        opts.batch_size = 8;
        LossConfig loss;
        loss.lambda = 0.6;
        loss.alpha = 1.0;

        const auto split = run_training(clone_pair(p), phi.clone(), d, ch, loss, opts);
        const auto mono = run_monolithic(clone_pair(p), phi.clone(), d, ch, loss, opts);

        std::vector<const Tensor*> a, b;
        for (const Tensor* t : static_cast<const Model&>(split.coders.encoder).params())
            a.push_back(t);
        for (const Tensor* t : static_cast<const Model&>(mono.coders.encoder).params())
            b.push_back(t);
        for (const Tensor* t : static_cast<const Model&>(split.coders.decoder).params())
            a.push_back(t);
        for (const Tensor* t : static_cast<const Model&>(mono.coders.decoder).params())
            b.push_back(t);
        CHECK(max_abs_diff(a, b) <= 1e-9);

        REQUIRE(split.epoch_metrics.size() == mono.metrics.size());
        for (std::size_t e = 0; e < mono.metrics.size(); ++e) {
            CHECK(split.epoch_metrics[e].esd == doctest::Approx(mono.metrics[e].esd));
            CHECK(split.epoch_metrics[e].accuracy == mono.metrics[e].accuracy);
        }
    }
}

TEST_CASE("noiseless channel delivers the encoder output bit-for-bit after f32") {
    const Dataset d = synth_dataset(SynthKind::TwoClassDigits8x8, 8, 3);
    CoderPair p = small_coders(64, 16, 5);
    Model enc_copy = p.encoder.clone();
    ChannelConfig ch;
    ch.noiseless = true;
    ch.n_x = 16;
    ch.n_k = 64;
    TrainOptions opts;
    opts.max_epochs = 1;
    opts.batch_size = 8;

    auto [tx_stream, rx_stream] = make_inproc_pair();
    Transmitter tx(std::move(p.encoder), d.images, ch, opts);
    std::thread tx_thread([&] { tx.run(*tx_stream); });

    const DataBatchMsg msg = unpack_data_batch(read_frame(*rx_stream));
    const auto idx = batch_indices(d.size(), opts.batch_size, opts.shuffle_seed, 0)[0];
    const Tensor expected = quantize_f32(enc_copy.forward(stack_batch(d.images, idx)));
    CHECK(msg.y.data == expected.data);

    // zero feedback: the encoder must come out unchanged
    FeedbackMsg fb;
    fb.epoch = msg.epoch;
    fb.batch_id = msg.batch_id;
    fb.grad_y = Tensor(msg.y.shape);
    fb.y = msg.y;
    write_frame(*rx_stream, pack(fb));
    MetricsMsg done;
    done.epoch = 0;
    done.stop = 1;
    write_frame(*rx_stream, pack(done));
    tx_thread.join();
    CHECK(flat_params(tx.encoder()) == flat_params(enc_copy));
}

TEST_CASE("two identical sessions produce identical DataBatch bytes") {
    const Dataset d = synth_dataset(SynthKind::TwoClassDigits8x8, 8, 3);
    auto first_frame = [&](std::uint64_t) {
        CoderPair p = small_coders(64, 16, 5);
        ChannelConfig ch;
        ch.snr_db = 10.0;
        ch.n_x = 16;
        ch.n_k = 64;
        ch.seed = 77;
        TrainOptions opts;
        opts.max_epochs = 1;
        opts.batch_size = 8;
        auto [tx_stream, rx_stream] = make_inproc_pair();
        Transmitter tx(std::move(p.encoder), d.images, ch, opts);
        std::thread t([&] {
            try {
                tx.run(*tx_stream);
            } catch (...) {
            }
        });
        const Frame f = read_frame(*rx_stream);
        rx_stream.reset();  // hang up; transmitter aborts
        t.join();
        return encode_frame(f);
    };
    CHECK(first_frame(0) == first_frame(1));
}

TEST_CASE("mismatched feedback ids abort the session") {
    const Dataset d = synth_dataset(SynthKind::TwoClassDigits8x8, 8, 3);
    CoderPair p = small_coders(64, 16, 5);
    ChannelConfig ch;
    ch.noiseless = true;
    ch.n_x = 16;
    ch.n_k = 64;
    TrainOptions opts;
    opts.max_epochs = 1;
    opts.batch_size = 8;

    auto [tx_stream, rx_stream] = make_inproc_pair();
    Transmitter tx(std::move(p.encoder), d.images, ch, opts);
    std::exception_ptr err;
    std::thread t([&] {
        try {
            tx.run(*tx_stream);
        } catch (...) {
            err = std::current_exception();
        }
    });
    const DataBatchMsg msg = unpack_data_batch(read_frame(*rx_stream));
    FeedbackMsg fb;
    fb.epoch = msg.epoch;
    fb.batch_id = msg.batch_id + 1;  // out of step
    fb.grad_y = Tensor(msg.y.shape);
    fb.y = msg.y;
    write_frame(*rx_stream, pack(fb));
    t.join();
    REQUIRE(err);
    CHECK_THROWS_AS(std::rethrow_exception(err), ProtocolError);
}

TEST_CASE("toy end-to-end training reaches high accuracy") {
    const Dataset d = synth_dataset(SynthKind::TwoClassDigits8x8, 120, 5);
    Model phi = small_phi(64, 2, 4);
    train_pragmatic(phi, d, 50, {.eta = 0.01}, 3);

    CoderPair p = small_coders(64, 16, 9);
    ChannelConfig ch;
    ch.snr_db = 10.0;
    ch.n_x = 16;
    ch.n_k = 64;
    ch.seed = 42;
    TrainOptions opts;
    opts.max_epochs = 60;
    LossConfig loss;
    loss.lambda = lambda_s(0.25);
    loss.alpha_mode = AlphaMode::AutoFirstBatch;

    const auto result = run_training(std::move(p), std::move(phi), d, ch, loss, opts);
    REQUIRE_FALSE(result.epoch_metrics.empty());
    CHECK(result.epoch_metrics.back().accuracy >= 0.9);
    CHECK(result.epoch_metrics.back().psnr_db >= 8.0);
}

TEST_CASE("inproc and tcp transports train to identical parameters") {
    const Dataset d = synth_dataset(SynthKind::TwoClassDigits8x8, 32, 5);
    Model phi = small_phi(64, 2, 4);
    train_pragmatic(phi, d, 20, {.eta = 0.01}, 3);

    auto run_one = [&](TransportKind kind) {
        CoderPair p = small_coders(64, 16, 9);
        ChannelConfig ch;
        ch.snr_db = 10.0;
        ch.n_x = 16;
        ch.n_k = 64;
        ch.seed = 42;
        TrainOptions opts;
        opts.max_epochs = 5;
        LossConfig loss;
        loss.lambda = 0.7;
        return run_training(std::move(p), phi.clone(), d, ch, loss, opts, kind);
    };
    const auto a = run_one(TransportKind::Inproc);
    const auto b = run_one(TransportKind::Tcp);
    CHECK(flat_params(a.coders.encoder) == flat_params(b.coders.encoder));
    CHECK(flat_params(a.coders.decoder) == flat_params(b.coders.decoder));
}

TEST_CASE("pretraining handoff reaches the transmitter through the wire") {
    const Dataset d = synth_dataset(SynthKind::TwoClassDigits8x8, 32, 5);
    CoderPair p = small_coders(64, 16, 9);
    ChannelConfig ch;
    ch.noiseless = true;
    ch.n_x = 16;
    ch.n_k = 64;
    TrainOptions opts;
    opts.max_epochs = 2;
    LossConfig loss;
    loss.lambda = 1.0;
    const auto result =
        run_training(std::move(p), Model{}, d, ch, loss, opts, TransportKind::Inproc, 0, 5);
    CHECK(result.epoch_metrics.size() == 2);
}
