// Standalone transmitter endpoint. Connects to a listening receiver over TCP
// and runs the training protocol from the transmitter side. This binary is
// built against the core library only; it has no access to labels, losses, or
// any other receiver-side machinery.

#include <CLI11.hpp>

#include <iostream>
#include <memory>

#include "semcom/channel.hpp"
#include "semcom/data.hpp"
#include "semcom/layers.hpp"
#include "semcom/rng.hpp"
#include "semcom/transmitter.hpp"
#include "semcom/transport.hpp"

using namespace semcom;

int main(int argc, char** argv) {
    CLI::App app{"transmitter endpoint (connects to a listening receiver)"};

    std::string host = "127.0.0.1";
    std::uint16_t port = 0;
    std::string synth = "two_class_digits_8x8";
    std::size_t n_samples = 200;
    std::uint64_t data_seed = 1;
    double offset = 0.0;
    std::size_t n_x = 16;
    double snr_db = 10.0;
    bool noiseless = false;
    std::uint64_t channel_seed = 42;
    std::uint64_t init_seed = 7;
    TrainOptions opts;

    app.add_option("--host", host, "receiver host");
    app.add_option("--port", port, "receiver port")->required();
    app.add_option("--synth", synth, "synthetic dataset name");
    app.add_option("--n", n_samples, "number of library images");
    app.add_option("--data-seed", data_seed, "dataset generation seed");
    app.add_option("--offset", offset, "domain intensity offset");
    app.add_option("--n-x", n_x, "channel symbols per image");
    app.add_option("--snr", snr_db, "channel SNR in dB");
    app.add_flag("--noiseless", noiseless, "disable channel noise");
    app.add_option("--channel-seed", channel_seed, "channel noise seed");
    app.add_option("--init-seed", init_seed, "encoder initialization seed");
    app.add_option("--epochs", opts.max_epochs, "maximum training epochs");
    app.add_option("--batch", opts.batch_size, "batch size");
    app.add_option("--shuffle-seed", opts.shuffle_seed, "shared shuffle seed");
    app.add_option("--lr", opts.adam.eta, "Adam learning rate");
    app.add_option("--patience", opts.patience, "early-stop patience (epochs)");
    app.add_flag("--expect-pretrained", opts.expect_pretrained,
                 "wait for an encoder parameter handoff before training");

    CLI11_PARSE(app, argc, argv);

    try {
        SynthOptions synth_opts;
        synth_opts.domain_offset = offset;
        Dataset data = synth_dataset(synth_kind_from_name(synth), n_samples, data_seed,
                                     synth_opts);
        const std::size_t n_k = numel(data.images.front().shape);

        ChannelConfig channel;
        channel.n_k = n_k;
        channel.n_x = n_x;
        channel.snr_db = snr_db;
        channel.noiseless = noiseless;
        channel.seed = channel_seed;
        channel.validate();

        // Matches the receiver-side default coder construction: encoder and
        // decoder draw from one shared stream, encoder first.
        Rng rng = derive_rng(init_seed, 0xc0de);
        Model encoder;
        encoder.add(std::make_unique<Dense>(n_k, n_x, rng));
        encoder.add(std::make_unique<PowerNorm>());

        Transmitter tx(std::move(encoder), std::move(data.images), channel, opts);
        auto stream = tcp_connect(host, port);
        tx.run(*stream);
        std::cerr << "[tx-probe] session complete\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "tx-probe error: " << e.what() << "\n";
        return 3;
    }
}
