#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "cli_support.hpp"
#include "semcom/metrics.hpp"
#include "semcom/task/da.hpp"
#include "semcom/task/similarity.hpp"
#include "semcom/wire.hpp"

namespace fs = std::filesystem;
using namespace semcom;
using namespace semcom::cli;

namespace {

bool verbose() {
    const char* lvl = std::getenv("SEMCOM_LOG_LEVEL");
    return !(lvl && std::string(lvl) == "quiet");
}

void info(const std::string& msg) {
    if (verbose()) std::cerr << "[semcom] " << msg << "\n";
}

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;

    KvConfig load() const {
        KvConfig cfg = config_path.empty() ? KvConfig{} : KvConfig::from_file(config_path);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects key=value: " + kv);
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        return cfg;
    }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("-c,--config", args.config_path, "key=value config file");
    cmd->add_option("-s,--set", args.overrides, "override config entries (key=value)")
        ->take_all();
}

void write_report(const fs::path& dir, const KvConfig& cfg,
                  const std::vector<std::pair<std::string, std::string>>& results) {
    fs::create_directories(dir);
    std::ofstream out(dir / "report.txt");
    if (!out) throw ConfigError("cannot write report in " + dir.string());
    for (const auto& [k, v] : cfg.entries()) out << "config." << k << "=" << v << "\n";
    for (const auto& [k, v] : results) out << k << "=" << v << "\n";
}

void write_metrics_csv(const fs::path& dir, const std::vector<MetricsMsg>& metrics) {
    std::ofstream out(dir / "metrics.csv");
    out << "epoch,loss,acc,psnr,iou\n";
    for (const auto& m : metrics)
        out << m.epoch << "," << format_double(m.esd) << "," << format_double(m.accuracy)
            << "," << format_double(m.psnr_db) << "," << format_double(m.iou) << "\n";
}

std::size_t class_count(const Dataset& d) {
    std::size_t c = 0;
    for (std::size_t l : d.labels) c = std::max(c, l + 1);
    return std::max<std::size_t>(c, 2);
}

Model make_phi(const KvConfig& cfg, const RunConfig& rc) {
    const std::string blob = cfg.get("model.phi_blob", "");
    if (!blob.empty()) return deserialize_model(read_blob(blob));
    Model phi;
    const std::string arch = cfg.get("model.phi", "");
    if (!arch.empty()) {
        Rng rng = derive_rng(rc.init_seed, 0xf1);
        phi = parse_arch(arch, rng);
    } else {
        phi = default_phi(rc.channel.n_k, class_count(rc.data), rc.init_seed);
    }
    if (rc.loss.lambda < 1.0 && rc.loss.task == task::TaskKind::Discrete) {
        const auto rep = task::train_pragmatic(phi, rc.data, rc.phi_epochs, AdamConfig{.eta = 0.01},
                                               rc.init_seed);
        info("pragmatic model trained, accuracy " + format_double(rep.train_accuracy));
    }
    return phi;
}

task::CoderPair make_coders(const KvConfig& cfg, const RunConfig& rc) {
    const std::string enc_blob = cfg.get("model.encoder_blob", "");
    const std::string dec_blob = cfg.get("model.decoder_blob", "");
    if (!enc_blob.empty() && !dec_blob.empty()) {
        task::CoderPair pair;
        pair.encoder = deserialize_model(read_blob(enc_blob));
        pair.decoder = deserialize_model(read_blob(dec_blob));
        pair.cr = compression_rate(rc.channel.n_x, rc.channel.n_k);
        pair.task = rc.loss.task;
        return pair;
    }
    const std::string enc = cfg.get("model.encoder", "");
    const std::string dec = cfg.get("model.decoder", "");
    if (!enc.empty() && !dec.empty()) {
        Rng rng = derive_rng(rc.init_seed, 0xc0de);
        task::CoderPair pair;
        pair.encoder = parse_arch(enc, rng);
        pair.decoder = parse_arch(dec, rng);
        pair.cr = compression_rate(rc.channel.n_x, rc.channel.n_k);
        pair.task = rc.loss.task;
        return pair;
    }
    return default_coders(rc.channel.n_k, rc.channel.n_x, rc.loss.task, rc.init_seed);
}

// ----------------------------------------------------------------- train

int cmd_train(const CommonArgs& args) {
    const KvConfig cfg = args.load();
    RunConfig rc = interpret_run_config(cfg);
    Model phi = make_phi(cfg, rc);
    task::CoderPair coders = make_coders(cfg, rc);

    info("training: epochs=" + std::to_string(rc.train.max_epochs) +
         " lambda=" + format_double(rc.loss.lambda));
    auto result = task::run_training(std::move(coders), phi.clone(), rc.data, rc.channel,
                                     rc.loss, rc.train, rc.transport, rc.tcp_port,
                                     rc.pretrain_epochs);

    const fs::path out = rc.out_dir;
    fs::create_directories(out);
    write_blob((out / "encoder.bin").string(), serialize_model(result.coders.encoder));
    write_blob((out / "decoder.bin").string(), serialize_model(result.coders.decoder));
    write_blob((out / "phi.bin").string(), serialize_model(phi));
    write_metrics_csv(out, result.epoch_metrics);

    std::vector<std::pair<std::string, std::string>> res;
    res.emplace_back("epochs_run", std::to_string(result.epoch_metrics.size()));
    if (!result.epoch_metrics.empty()) {
        const auto& last = result.epoch_metrics.back();
        res.emplace_back("final_esd", format_double(last.esd));
        res.emplace_back("final_accuracy", format_double(last.accuracy));
        res.emplace_back("final_psnr_db", format_double(last.psnr_db));
        res.emplace_back("final_iou", format_double(last.iou));
    }
    write_report(out, cfg, res);
    info("wrote " + (out / "report.txt").string());
    return 0;
}

// ----------------------------------------------------------------- eval

int cmd_eval(const CommonArgs& args) {
    const KvConfig cfg = args.load();
    RunConfig rc = interpret_run_config(cfg);
    task::CoderPair coders;
    coders.encoder = deserialize_model(read_blob(cfg.require("model.encoder_blob")));
    coders.decoder = deserialize_model(read_blob(cfg.require("model.decoder_blob")));
    coders.cr = compression_rate(rc.channel.n_x, rc.channel.n_k);
    coders.task = rc.loss.task;
    Model phi = deserialize_model(read_blob(cfg.require("model.phi_blob")));

    std::vector<std::string> snrs;
    {
        std::istringstream in(cfg.get("eval.snr_list", format_double(rc.channel.snr_db)));
        std::string tok;
        while (std::getline(in, tok, ',')) snrs.push_back(tok);
    }

    const fs::path out = rc.out_dir;
    fs::create_directories(out);
    std::ofstream csv(out / "eval.csv");
    csv << "snr_db,cr,acc,psnr,iou\n";
    for (const auto& snr : snrs) {
        ChannelConfig ch = rc.channel;
        if (snr == "inf" || snr == "noiseless") {
            ch.noiseless = true;
        } else {
            ch.noiseless = false;
            ch.snr_db = std::stod(snr);
        }
        const auto r = task::evaluate(coders, phi, rc.data, ch);
        const std::string row = (ch.noiseless ? "inf" : format_double(ch.snr_db)) + "," +
                                format_double(coders.cr) + "," + format_double(r.accuracy) +
                                "," + format_double(r.psnr_db) + "," +
                                format_double(r.mean_iou);
        csv << row << "\n";
        std::cout << row << "\n";
    }
    write_report(out, cfg, {{"rows", std::to_string(snrs.size())}});
    return 0;
}

// ----------------------------------------------------------------- pretraining

int cmd_pretrain_phi(const CommonArgs& args) {
    const KvConfig cfg = args.load();
    RunConfig rc = interpret_run_config(cfg);
    Model phi = default_phi(rc.channel.n_k, class_count(rc.data), rc.init_seed);
    const std::string arch = cfg.get("model.phi", "");
    if (!arch.empty()) {
        Rng rng = derive_rng(rc.init_seed, 0xf1);
        phi = parse_arch(arch, rng);
    }
    const auto rep =
        task::train_pragmatic(phi, rc.data, rc.phi_epochs, AdamConfig{.eta = 0.01}, rc.init_seed);
    const fs::path out = rc.out_dir;
    fs::create_directories(out);
    write_blob((out / "phi.bin").string(), serialize_model(phi));
    write_report(out, cfg, {{"train_accuracy", format_double(rep.train_accuracy)},
                            {"epochs_run", std::to_string(rep.epochs_run)}});
    std::cout << "train_accuracy=" << format_double(rep.train_accuracy) << "\n";
    return 0;
}

int cmd_pretrain_recon(const CommonArgs& args) {
    const KvConfig cfg = args.load();
    RunConfig rc = interpret_run_config(cfg);
    task::CoderPair coders = make_coders(cfg, rc);
    const auto rep = task::pretrain_reconstruction(coders, rc.data, rc.channel,
                                                   rc.train.max_epochs, rc.train.adam,
                                                   rc.train.shuffle_seed, rc.train.batch_size);
    const fs::path out = rc.out_dir;
    fs::create_directories(out);
    write_blob((out / "encoder.bin").string(), rep.encoder_blob);
    write_blob((out / "decoder.bin").string(), serialize_model(coders.decoder));
    write_report(out, cfg, {{"initial_mse", format_double(rep.initial_mse)},
                            {"final_mse", format_double(rep.final_mse)}});
    std::cout << "final_mse=" << format_double(rep.final_mse) << "\n";
    return 0;
}

// ----------------------------------------------------------------- data adaptation

task::CganBundle make_bundle(const KvConfig& cfg, const Shape& lib_shape, std::uint64_t seed) {
    const std::size_t n = numel(lib_shape);
    Rng rng = derive_rng(seed, 0xda);
    task::CganBundle b;
    const std::string g_arch = cfg.get("da.generator", "");
    const std::string d_arch = cfg.get("da.discriminator", "");
    auto make_g = [&]() {
        if (!g_arch.empty()) return parse_arch(g_arch, rng);
        // identity-initialized per-pixel affine map: enough capacity for
        // global intensity/contrast mismatch without mangling image structure
        Model g;
        if (lib_shape.size() == 2) {
            g.add(std::make_unique<Reshape>(Shape{1, lib_shape[0], lib_shape[1]}));
            auto conv = std::make_unique<Conv2d>(1, 1, 1);
            conv->weight().data[0] = 1.0;
            g.add(std::move(conv));
            g.add(std::make_unique<Flatten>());
        } else {
            auto dense = std::make_unique<Dense>(n, n);
            dense->set_identity();
            g.add(std::move(dense));
        }
        return g;
    };
    auto make_d = [&]() {
        if (!d_arch.empty()) return parse_arch(d_arch, rng);
        // zero-initialized linear probe: starts exactly at D = 0.5, which
        // keeps the minimax game away from the saturated regime
        Model d;
        d.add(std::make_unique<Dense>(n, 1));
        d.add(std::make_unique<Sigmoid>());
        return d;
    };
    b.g_k = make_g();
    b.g_s = make_g();
    b.d_k = make_d();
    b.d_s = make_d();
    return b;
}

task::CganTrainOptions da_opts(const KvConfig& cfg) {
    task::CganTrainOptions o;
    o.epochs = cfg.get_size("da.epochs", 300);
    o.batch_size = cfg.get_size("da.batch", 16);
    o.cycle_weight = cfg.get_num("da.cycle_weight", 1.0);
    o.adam.eta = cfg.get_num("da.lr", 2e-2);
    o.disc_lr_scale = cfg.get_num("da.disc_lr_scale", 0.1);
    o.seed = static_cast<std::uint64_t>(cfg.get_num("da.seed", 1));
    return o;
}

int cmd_da_train(const CommonArgs& args) {
    const KvConfig cfg = args.load();
    const Dataset lib = load_dataset(cfg, "dataset");
    const Dataset obs = load_dataset(cfg, "obsset");
    task::CganBundle bundle = make_bundle(cfg, lib.images.front().shape,
                                          static_cast<std::uint64_t>(cfg.get_num("da.seed", 1)));
    const auto opts = da_opts(cfg);
    task::train_cgan(bundle, lib, obs, opts);

    fs::path out = cfg.get("output.dir", "out");
    if (const char* env = std::getenv("SEMCOM_OUT_DIR")) out = env;
    fs::create_directories(out);
    write_blob((out / "g_k.bin").string(), serialize_model(bundle.g_k));
    write_blob((out / "g_s.bin").string(), serialize_model(bundle.g_s));
    write_blob((out / "d_k.bin").string(), serialize_model(bundle.d_k));
    write_blob((out / "d_s.bin").string(), serialize_model(bundle.d_s));

    std::vector<std::size_t> probe(std::min<std::size_t>(lib.size(), obs.size()));
    for (std::size_t i = 0; i < probe.size(); ++i) probe[i] = i;
    const double total = task::cgan_total(bundle, stack_batch(lib.images, probe),
                                          stack_batch(obs.images, probe));
    write_report(out, cfg, {{"cgan_total", format_double(total)},
                            {"epochs_run", std::to_string(opts.epochs)}});
    std::cout << "cgan_total=" << format_double(total) << "\n";
    return 0;
}

int cmd_da_apply(const CommonArgs& args) {
    const KvConfig cfg = args.load();
    const Dataset obs = load_dataset(cfg, "obsset");
    Model g_k = deserialize_model(read_blob(cfg.require("model.g_k_blob")));
    const std::size_t h = cfg.get_size("da.lib_h", obs.images.front().shape[0]);
    const std::size_t w = cfg.get_size("da.lib_w", obs.images.front().shape[1]);
    Dataset adapted;
    adapted.name = obs.name + "_adapted";
    adapted.labels = obs.labels;
    for (const Tensor& s : obs.images) adapted.images.push_back(task::adapt(g_k, s, {h, w}));

    fs::path out = cfg.get("output.dir", "out");
    if (const char* env = std::getenv("SEMCOM_OUT_DIR")) out = env;
    fs::create_directories(out);
    save_idx(adapted, (out / "adapted-images.idx").string(),
             adapted.labels.empty() ? "" : (out / "adapted-labels.idx").string());
    write_report(out, cfg, {{"adapted", std::to_string(adapted.images.size())}});
    return 0;
}

int cmd_da_eval(const CommonArgs& args) {
    const KvConfig cfg = args.load();
    RunConfig rc = interpret_run_config(cfg);  // [dataset] = library domain
    const Dataset obs = load_dataset(cfg, "obsset");
    Dataset obs_test = cfg.has("obstest.kind") ? load_dataset(cfg, "obstest") : obs;

    // library pipeline (frozen afterwards)
    Model phi = make_phi(cfg, rc);
    auto trained = task::run_training(make_coders(cfg, rc), phi.clone(), rc.data, rc.channel,
                                      rc.loss, rc.train, task::TransportKind::Inproc, 0,
                                      rc.pretrain_epochs);
    ChannelConfig eval_ch = rc.channel;
    eval_ch.seed = rc.channel.seed ^ 0xe7a1ULL;

    const Shape lib_shape = rc.data.images.front().shape;

    // leg 1: no DA, resample only
    Dataset no_da;
    no_da.labels = obs_test.labels;
    for (const Tensor& s : obs_test.images)
        no_da.images.push_back(resample_image(s, lib_shape[0], lib_shape[1]));
    const auto r_no_da = task::evaluate(trained.coders, phi, no_da, eval_ch);

    // leg 2: DA via CycleGAN
    task::CganBundle bundle = make_bundle(cfg, lib_shape,
                                          static_cast<std::uint64_t>(cfg.get_num("da.seed", 1)));
    task::train_cgan(bundle, rc.data, obs, da_opts(cfg));
    Dataset da;
    da.labels = obs_test.labels;
    for (const Tensor& s : obs_test.images)
        da.images.push_back(task::adapt(bundle.g_k, resample_image(s, lib_shape[0], lib_shape[1]),
                                        lib_shape));
    const auto r_da = task::evaluate(trained.coders, phi, da, eval_ch);

    // leg 3: retrained on the observed domain
    RunConfig rc_obs = rc;
    rc_obs.data = obs;
    Model phi_obs = default_phi(numel(lib_shape), class_count(obs), rc.init_seed + 1);
    task::train_pragmatic(phi_obs, obs, rc.phi_epochs, AdamConfig{.eta = 0.01}, rc.init_seed + 1);
    auto retrained = task::run_training(
        default_coders(rc.channel.n_k, rc.channel.n_x, rc.loss.task, rc.init_seed + 1),
        phi_obs.clone(), obs, rc.channel, rc.loss, rc.train, task::TransportKind::Inproc, 0,
        rc.pretrain_epochs);
    const auto r_re = task::evaluate(retrained.coders, phi_obs, obs_test, eval_ch);

    fs::path out = rc.out_dir;
    fs::create_directories(out);
    write_report(out, cfg,
                 {{"no_da_accuracy", format_double(r_no_da.accuracy)},
                  {"da_accuracy", format_double(r_da.accuracy)},
                  {"retrained_accuracy", format_double(r_re.accuracy)},
                  {"no_da_psnr_db", format_double(r_no_da.psnr_db)},
                  {"da_psnr_db", format_double(r_da.psnr_db)},
                  {"retrained_psnr_db", format_double(r_re.psnr_db)}});
    std::cout << "no_da_accuracy=" << format_double(r_no_da.accuracy) << "\n"
              << "da_accuracy=" << format_double(r_da.accuracy) << "\n"
              << "retrained_accuracy=" << format_double(r_re.accuracy) << "\n";
    return 0;
}

// ----------------------------------------------------------------- pad

int cmd_pad(const CommonArgs& args) {
    const KvConfig cfg = args.load();
    const Dataset lib = load_dataset(cfg, "dataset");
    const Dataset obs = load_dataset(cfg, "obsset");
    const std::size_t per_domain =
        cfg.get_size("pad.n", std::min(lib.size(), obs.size()));
    const auto r = task::proxy_a_distance(lib, obs, per_domain,
                                          static_cast<std::uint64_t>(cfg.get_num("pad.seed", 1)));
    std::cout << "epsilon=" << format_double(r.epsilon) << "\n"
              << "d_a=" << format_double(r.d_a) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"task-unaware semantic communication trainer and tools"};
    app.require_subcommand(1);

    CommonArgs train_args, eval_args, phi_args, recon_args, dat_args, daa_args, dae_args,
        pad_args;
    auto* c_train = app.add_subcommand("train", "run the split training protocol");
    add_common(c_train, train_args);
    auto* c_eval = app.add_subcommand("eval", "evaluate frozen coders over an SNR grid");
    add_common(c_eval, eval_args);
    auto* c_phi = app.add_subcommand("pretrain-phi", "train the pragmatic model");
    add_common(c_phi, phi_args);
    auto* c_recon =
        app.add_subcommand("pretrain-recon", "receiver-local reconstruction pretraining");
    add_common(c_recon, recon_args);
    auto* c_dat = app.add_subcommand("da-train", "train the data adaptation networks");
    add_common(c_dat, dat_args);
    auto* c_daa = app.add_subcommand("da-apply", "convert observed data with G_K");
    add_common(c_daa, daa_args);
    auto* c_dae = app.add_subcommand("da-eval", "compare no-DA / DA / retrained");
    add_common(c_dae, dae_args);
    auto* c_pad = app.add_subcommand("pad", "proxy A-distance between two datasets");
    add_common(c_pad, pad_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_train->parsed()) return cmd_train(train_args);
        if (c_eval->parsed()) return cmd_eval(eval_args);
        if (c_phi->parsed()) return cmd_pretrain_phi(phi_args);
        if (c_recon->parsed()) return cmd_pretrain_recon(recon_args);
        if (c_dat->parsed()) return cmd_da_train(dat_args);
        if (c_daa->parsed()) return cmd_da_apply(daa_args);
        if (c_dae->parsed()) return cmd_da_eval(dae_args);
        if (c_pad->parsed()) return cmd_pad(pad_args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ProtocolError& e) {
        std::cerr << "protocol error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const ShapeError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
