#include "cli_support.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace semcom::cli {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

KvConfig KvConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

KvConfig KvConfig::from_string(const std::string& text) {
    KvConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("bad config line: " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        cfg.kv_[section.empty() ? key : section + "." + key] = val;
    }
    return cfg;
}

std::string KvConfig::get(const std::string& key, const std::string& fallback) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

std::string KvConfig::require(const std::string& key) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("missing config key: " + key);
    return it->second;
}

double KvConfig::get_num(const std::string& key, double fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + " is not a number: " + it->second);
    }
}

std::size_t KvConfig::get_size(const std::string& key, std::size_t fallback) const {
    const double v = get_num(key, static_cast<double>(fallback));
    if (v < 0 || v != std::floor(v))
        throw ConfigError("config key " + key + " must be a non-negative integer");
    return static_cast<std::size_t>(v);
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError("config key " + key + " must be true/false");
}

Dataset load_dataset(const KvConfig& cfg, const std::string& section) {
    const std::string kind = cfg.require(section + ".kind");
    if (kind.rfind("synth:", 0) == 0) {
        SynthOptions opt;
        opt.domain_offset = cfg.get_num(section + ".offset", 0.0);
        try {
            return synth_dataset(synth_kind_from_name(kind.substr(6)),
                                 cfg.get_size(section + ".n", 200),
                                 static_cast<std::uint64_t>(cfg.get_num(section + ".seed", 1)),
                                 opt);
        } catch (const NumericError& e) {
            throw ConfigError(e.what());
        }
    }
    if (kind == "idx") {
        const std::string images = cfg.require(section + ".images");
        const std::string labels = cfg.get(section + ".labels", "");
        return labels.empty() ? load_idx_images(images) : load_idx(images, labels);
    }
    throw ConfigError("unknown dataset kind: " + kind);
}

RunConfig interpret_run_config(const KvConfig& cfg) {
    RunConfig rc;
    rc.data = load_dataset(cfg, "dataset");
    if (rc.data.images.empty()) throw ConfigError("dataset is empty");
    const std::size_t n_k = numel(rc.data.images.front().shape);

    const double cr = cfg.get_num("channel.cr", 0.25);
    if (cr <= 0.0 || cr > 1.0) throw ConfigError("channel.cr must be in (0,1]");
    rc.channel.n_k = n_k;
    rc.channel.n_x = cfg.get_size("channel.n_x",
                                  std::max<std::size_t>(1, static_cast<std::size_t>(
                                                               std::lround(cr * n_k))));
    rc.channel.snr_db = cfg.get_num("channel.snr_db", 10.0);
    rc.channel.noiseless = cfg.get_bool("channel.noiseless", false);
    rc.channel.seed = static_cast<std::uint64_t>(cfg.get_num("channel.seed", 42));
    if (!rc.channel.noiseless && !std::isfinite(rc.channel.snr_db))
        throw ConfigError("channel.snr_db must be finite (or set channel.noiseless)");

    rc.loss.task = cfg.get("loss.task", "discrete") == "continuous"
                       ? task::TaskKind::Continuous
                       : task::TaskKind::Discrete;
    const std::string lambda = cfg.get("loss.lambda", "lambda_s");
    rc.loss.lambda = lambda == "lambda_s"
                         ? task::lambda_s(compression_rate(rc.channel.n_x, rc.channel.n_k))
                         : cfg.get_num("loss.lambda", 0.5);
    if (rc.loss.lambda < 0.0 || rc.loss.lambda > 1.0)
        throw ConfigError("loss.lambda must be in [0,1]");
    const std::string alpha = cfg.get("loss.alpha", "auto");
    if (alpha == "auto") {
        rc.loss.alpha_mode = task::AlphaMode::AutoFirstBatch;
    } else {
        rc.loss.alpha_mode = task::AlphaMode::Fixed;
        rc.loss.alpha = cfg.get_num("loss.alpha", 1.0);
        if (rc.loss.alpha <= 0.0) throw ConfigError("loss.alpha must be positive");
    }

    rc.train.max_epochs = cfg.get_size("train.epochs", 200);
    rc.train.batch_size = cfg.get_size("train.batch", 32);
    rc.train.shuffle_seed = static_cast<std::uint64_t>(cfg.get_num("train.seed", 1));
    rc.train.adam.eta = cfg.get_num("train.lr", 1e-3);
    rc.train.patience = cfg.get_size("train.patience", 10);
    rc.pretrain_epochs = cfg.get_size("train.pretrain_epochs", 0);
    rc.phi_epochs = cfg.get_size("train.phi_epochs", 50);
    rc.init_seed = static_cast<std::uint64_t>(cfg.get_num("train.init_seed", 7));

    const std::string transport = cfg.get("transport.kind", "inproc");
    if (transport == "inproc")
        rc.transport = task::TransportKind::Inproc;
    else if (transport == "tcp")
        rc.transport = task::TransportKind::Tcp;
    else
        throw ConfigError("transport.kind must be inproc or tcp");
    rc.tcp_port = static_cast<std::uint16_t>(cfg.get_size("transport.port", 0));

    rc.out_dir = cfg.get("output.dir", "out");
    if (const char* env = std::getenv("SEMCOM_OUT_DIR")) rc.out_dir = env;
    return rc;
}

Model parse_arch(const std::string& spec, Rng& rng) {
    Model m;
    std::istringstream in(spec);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        std::vector<std::string> parts;
        std::istringstream pi(item);
        std::string p;
        while (std::getline(pi, p, ':')) parts.push_back(p);
        const std::string& name = parts[0];
        auto arg = [&](std::size_t i) -> std::size_t {
            if (i >= parts.size()) throw ConfigError("arch item needs more arguments: " + item);
            return static_cast<std::size_t>(std::stoul(parts[i]));
        };
        if (name == "dense")
            m.add(std::make_unique<Dense>(arg(1), arg(2), rng));
        else if (name == "conv2d")
            m.add(std::make_unique<Conv2d>(arg(1), arg(2), arg(3),
                                           parts.size() > 4 ? arg(4) : 1,
                                           parts.size() > 5 ? arg(5) : 0, rng));
        else if (name == "flatten")
            m.add(std::make_unique<Flatten>());
        else if (name == "reshape") {
            Shape s;
            for (std::size_t i = 1; i < parts.size(); ++i) s.push_back(arg(i));
            m.add(std::make_unique<Reshape>(std::move(s)));
        } else if (name == "relu")
            m.add(std::make_unique<Relu>());
        else if (name == "sigmoid")
            m.add(std::make_unique<Sigmoid>());
        else if (name == "tanh")
            m.add(std::make_unique<Tanh>());
        else if (name == "power_norm")
            m.add(std::make_unique<PowerNorm>());
        else
            throw ConfigError("unknown arch item: " + item);
    }
    return m;
}

task::CoderPair default_coders(std::size_t n_k, std::size_t n_x, task::TaskKind task,
                               std::uint64_t init_seed) {
    Rng rng = derive_rng(init_seed, 0xc0de);
    task::CoderPair pair;
    pair.encoder.add(std::make_unique<Dense>(n_k, n_x, rng));
    pair.encoder.add(std::make_unique<PowerNorm>());
    pair.decoder.add(std::make_unique<Dense>(n_x, n_k, rng));
    pair.cr = compression_rate(n_x, n_k);
    pair.task = task;
    return pair;
}

Model default_phi(std::size_t n_k, std::size_t n_classes, std::uint64_t init_seed) {
    Rng rng = derive_rng(init_seed, 0xf1);
    Model phi;
    phi.add(std::make_unique<Dense>(n_k, n_classes, rng));
    return phi;
}

std::vector<std::uint8_t> read_blob(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open blob: " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_blob(const std::string& path, const std::vector<std::uint8_t>& blob) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write blob: " + path);
    out.write(reinterpret_cast<const char*>(blob.data()),
              static_cast<std::streamsize>(blob.size()));
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace semcom::cli
