#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cli_support.hpp"
#include "semcom/channel.hpp"
#include "semcom/task/da.hpp"
#include "semcom/task/pragmatic.hpp"
#include "semcom/task/session.hpp"
#include "semcom/task/similarity.hpp"
#include "semcom/wire.hpp"

namespace py = pybind11;
using namespace semcom;

namespace {

Tensor vec_to_tensor(const std::vector<double>& v) {
    Tensor t;
    t.shape = {1, v.size()};  // a batch of one sample
    t.data = v;
    return t;
}

py::dict run_from_config(const std::string& config_text) {
    const auto cfg = cli::KvConfig::from_string(config_text);
    cli::RunConfig rc = cli::interpret_run_config(cfg);
    Model phi = cli::default_phi(rc.channel.n_k, 2, rc.init_seed);
    if (rc.loss.lambda < 1.0 && rc.loss.task == task::TaskKind::Discrete) {
        std::size_t n_classes = 2;
        for (std::size_t l : rc.data.labels) n_classes = std::max(n_classes, l + 1);
        phi = cli::default_phi(rc.channel.n_k, n_classes, rc.init_seed);
        task::train_pragmatic(phi, rc.data, rc.phi_epochs, AdamConfig{.eta = 0.01},
                              rc.init_seed);
    }
    auto result = task::run_training(
        cli::default_coders(rc.channel.n_k, rc.channel.n_x, rc.loss.task, rc.init_seed),
        phi.clone(), rc.data, rc.channel, rc.loss, rc.train, rc.transport, rc.tcp_port,
        rc.pretrain_epochs);

    py::dict out;
    out["epochs_run"] = result.epoch_metrics.size();
    if (!result.epoch_metrics.empty()) {
        const auto& last = result.epoch_metrics.back();
        out["final_esd"] = last.esd;
        out["final_accuracy"] = last.accuracy;
        out["final_psnr_db"] = last.psnr_db;
    }
    const auto enc = serialize_model(result.coders.encoder);
    const auto dec = serialize_model(result.coders.decoder);
    const auto phib = serialize_model(phi);
    out["encoder"] = py::bytes(reinterpret_cast<const char*>(enc.data()), enc.size());
    out["decoder"] = py::bytes(reinterpret_cast<const char*>(dec.data()), dec.size());
    out["phi"] = py::bytes(reinterpret_cast<const char*>(phib.data()), phib.size());
    return out;
}

py::dict pad_from_config(const std::string& config_text) {
    const auto cfg = cli::KvConfig::from_string(config_text);
    const Dataset lib = cli::load_dataset(cfg, "dataset");
    const Dataset obs = cli::load_dataset(cfg, "obsset");
    const auto r = task::proxy_a_distance(
        lib, obs, cfg.get_size("pad.n", std::min(lib.size(), obs.size())),
        static_cast<std::uint64_t>(cfg.get_num("pad.seed", 1)));
    py::dict out;
    out["epsilon"] = r.epsilon;
    out["d_a"] = r.d_a;
    return out;
}

}  // namespace

PYBIND11_MODULE(semcom, m) {
    m.doc() = "task-unaware semantic communication: channel, protocol, training";

    py::register_exception<ShapeError>(m, "ShapeError");
    py::register_exception<NumericError>(m, "NumericError");
    py::register_exception<ProtocolError>(m, "ProtocolError");
    py::register_exception<cli::ConfigError>(m, "ConfigError");

    m.def("power_normalize", [](const std::vector<double>& x) {
        return power_normalize(vec_to_tensor(x)).data;
    });
    m.def("noise_variance", &noise_variance);
    m.def(
        "awgn_transmit",
        [](const std::vector<double>& x, double snr_db, std::uint64_t seed) {
            ChannelConfig cfg;
            cfg.snr_db = snr_db;
            cfg.n_x = x.size();
            cfg.n_k = x.size();
            cfg.seed = seed;
            Rng rng(seed);
            return awgn_transmit(vec_to_tensor(x), cfg, rng).data;
        },
        py::arg("x"), py::arg("snr_db"), py::arg("seed") = 0);
    m.def("compression_rate", &compression_rate);
    m.def("suggested_kernel_size", &suggested_kernel_size);
    m.def("lambda_s", &task::lambda_s);
    m.def("pad", &task::pad);

    m.def(
        "encode_frame",
        [](int kind, const py::bytes& payload) {
            Frame f;
            f.kind = static_cast<MsgKind>(kind);
            const std::string s = payload;
            f.payload.assign(s.begin(), s.end());
            const auto bytes = encode_frame(f);
            return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        },
        py::arg("kind"), py::arg("payload"));
    m.def("decode_frame", [](const py::bytes& raw) {
        const std::string s = raw;
        const Frame f = decode_frame({s.begin(), s.end()});
        return py::make_tuple(static_cast<int>(f.kind),
                              py::bytes(reinterpret_cast<const char*>(f.payload.data()),
                                        f.payload.size()));
    });

    m.def(
        "synth_dataset",
        [](const std::string& name, std::size_t n, std::uint64_t seed, double offset) {
            SynthOptions opt;
            opt.domain_offset = offset;
            const Dataset d = synth_dataset(synth_kind_from_name(name), n, seed, opt);
            std::vector<std::vector<double>> images;
            images.reserve(d.images.size());
            for (const auto& img : d.images) images.push_back(img.data);
            return py::make_tuple(images, d.labels,
                                  py::make_tuple(d.images.front().shape[0],
                                                 d.images.front().shape[1]));
        },
        py::arg("name"), py::arg("n"), py::arg("seed") = 1, py::arg("offset") = 0.0);

    m.def("train", &run_from_config, py::arg("config_text"),
          "Run the split training protocol from a key=value config string.");
    m.def("proxy_a_distance", &pad_from_config, py::arg("config_text"));
}
