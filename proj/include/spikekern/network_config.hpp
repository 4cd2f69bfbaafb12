#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spikekern/dynamics.hpp"
#include "spikekern/jitconn.hpp"
#include "spikekern/projections.hpp"

namespace spikekern {

enum class NeuronModel { Lif, Gif };

struct VInit {
    enum class Kind { Const, Normal } kind = Kind::Const;
    Real mean = -60;
    Real std = 0;
};

struct PopulationConfig {
    std::string id;
    NeuronModel model = NeuronModel::Lif;
    std::size_t size = 0;
    LifParams lif;
    /// For GIF, an empty gif.tau_i2 means "sample U[tau_i2_low, tau_i2_high] per neuron".
    GifParams gif;
    Real tau_i2_low = 100;
    Real tau_i2_high = 3000;
    VInit v_init;
};

enum class CommKind {
    JitConn,   // procedural, never stored
    Sparse,    // CSR materialized from the same procedural spec
    Dense,     // dense matrix densified from the same procedural spec
    CsrFile,   // binary CSR file
    EdgeFile,  // text edge list
    Explicit,  // matrix supplied in code
};

struct CommConfig {
    CommKind kind = CommKind::JitConn;
    double prob = 0.1;
    WeightDist dist = HomoDist{1};
    /// Overrides the seed derived from the master seed.
    std::optional<std::uint64_t> seed;
    std::filesystem::path path;
    std::optional<Comm> matrix;
};

struct ProjectionConfig {
    std::string name;
    std::string pre;
    std::string post;
    CommConfig comm;
    std::size_t delay_steps = 0;
    Real tau = 5;
    SynOutput out = Coba{0};
    AlignMode mode = AlignMode::Post;
};

struct InputConfig {
    enum class Kind { Constant, Poisson } kind = Kind::Constant;
    std::string target;
    Real value = 0;
    double rate_hz = 0;
    Real weight = 1;
};

struct MonitorConfig {
    enum class Signal { Spikes, V, Rate } signal = Signal::Spikes;
    std::string target;
    /// Column name in the trace CSV; defaults to "<target>.<signal>".
    std::string name;
    /// V monitor: record these neurons individually instead of the population mean.
    std::vector<std::size_t> neurons;
};

struct NetworkConfig {
    double dt = 0.1;
    double duration = 100;
    std::uint64_t seed = 0;
    bool merge = true;
    unsigned threads = 1;
    std::vector<PopulationConfig> populations;
    std::vector<ProjectionConfig> projections;
    std::vector<InputConfig> inputs;
    std::vector<MonitorConfig> monitors;

    /// Number of simulated steps: round(duration / dt).
    std::size_t n_steps() const;
    std::size_t population_index(const std::string& id) const;
    /// Checks ids, sizes and parameters. Comm shapes are checked when the network is built.
    void validate() const;
};

/// Parses the JSON config document. Relative file paths resolve against base_dir.
NetworkConfig network_config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
NetworkConfig load_network_config(const std::filesystem::path& path);

/// Serializes a config back to the document schema. Explicit comm matrices are
/// summarized by kind and shape only.
nlohmann::json network_config_to_json(const NetworkConfig& cfg);

/// Fixed-in-degree COBA LIF network of 3200 s excitatory and 800 s inhibitory
/// neurons with connection probability min(1, 80 / N).
NetworkConfig build_ei_net(double scale, CommKind comm_kind = CommKind::JitConn, std::uint64_t seed = 0,
                           double duration_ms = 100, double dt = 0.1);

}  // namespace spikekern
