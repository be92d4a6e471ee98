#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "semcom/channel.hpp"
#include "semcom/data.hpp"
#include "semcom/model.hpp"
#include "semcom/task/pragmatic.hpp"
#include "semcom/task/session.hpp"
#include "semcom/transmitter.hpp"

namespace semcom::cli {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flat key=value config with [section] headers; keys are stored as
/// "section.key". Flag overrides replace entries before interpretation.
class KvConfig {
public:
    static KvConfig from_file(const std::string& path);
    static KvConfig from_string(const std::string& text);

    void set(const std::string& key, const std::string& value) { kv_[key] = value; }
    bool has(const std::string& key) const { return kv_.count(key) > 0; }

    std::string get(const std::string& key, const std::string& fallback) const;
    std::string require(const std::string& key) const;
    double get_num(const std::string& key, double fallback) const;
    std::size_t get_size(const std::string& key, std::size_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

/// Dataset spec: dataset.kind = synth:<name> | idx, plus kind-specific keys.
Dataset load_dataset(const KvConfig& cfg, const std::string& section);

struct RunConfig {
    Dataset data;
    ChannelConfig channel;
    task::LossConfig loss;
    TrainOptions train;
    std::size_t pretrain_epochs = 0;
    std::size_t phi_epochs = 50;
    task::TransportKind transport = task::TransportKind::Inproc;
    std::uint16_t tcp_port = 0;
    std::string out_dir = "out";
    std::uint64_t init_seed = 7;
};

RunConfig interpret_run_config(const KvConfig& cfg);

/// "dense:64:16,power_norm" and friends; parameters initialized from rng.
Model parse_arch(const std::string& spec, Rng& rng);

/// Default linear coder pair for a flattened source of dimension n_k at
/// compression rate n_x/n_k.
task::CoderPair default_coders(std::size_t n_k, std::size_t n_x, task::TaskKind task,
                               std::uint64_t init_seed);

Model default_phi(std::size_t n_k, std::size_t n_classes, std::uint64_t init_seed);

std::vector<std::uint8_t> read_blob(const std::string& path);
void write_blob(const std::string& path, const std::vector<std::uint8_t>& blob);

std::string format_double(double v);

}  // namespace semcom::cli
