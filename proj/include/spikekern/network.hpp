#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "spikekern/network_config.hpp"
#include "spikekern/projections.hpp"

namespace spikekern {

struct SpikeEvent {
    std::uint64_t step;
    std::uint64_t neuron;  // global id: population offset + local index
    bool operator==(const SpikeEvent&) const = default;
};

/// Wall-clock seconds spent per phase of the step loop.
struct PhaseTiming {
    double synapses = 0;  // decay + delivery
    double currents = 0;
    double neurons = 0;
    double record = 0;    // delay writes + monitors
    double total() const { return synapses + currents + neurons + record; }
};

/// Analytic state accounting in bytes.
struct StateBytes {
    std::size_t neurons = 0;
    std::size_t synapses = 0;
    std::size_t comm = 0;
    std::size_t delays = 0;
    std::size_t total() const { return neurons + synapses + comm + delays; }
    nlohmann::json to_json() const;
};

struct SimulationResult {
    std::size_t steps = 0;
    double dt = 0;
    std::vector<SpikeEvent> raster;
    std::vector<std::string> trace_names;
    /// traces[c][s] is column c at step s.
    std::vector<std::vector<double>> traces;
    /// Total spikes per population (all populations, monitored or not).
    std::vector<std::uint64_t> spike_counts;
    PhaseTiming timing;
    StateBytes bytes;
    nlohmann::json manifest;

    /// Lines "step<TAB>neuron_id".
    void write_raster(std::ostream& os) const;
    /// CSV with header "step,<name>...".
    void write_traces(std::ostream& os) const;
};

std::vector<SpikeEvent> read_raster(std::istream& is);

/// A built network: resolved comm matrices, merged synapse states, delay
/// buffers and neuron states. Each step runs
///   decay shared synapses -> deliver delayed spikes -> currents ->
///   neuron update -> delay write -> monitors.
class Network {
public:
    explicit Network(NetworkConfig cfg);

    const NetworkConfig& config() const { return cfg_; }
    std::size_t current_step() const { return step_; }
    bool done() const { return step_ >= cfg_.n_steps(); }

    /// Advances one step. Throws NumericalError on a non-finite membrane potential.
    void step();
    /// Runs the remaining steps and returns everything recorded since construction.
    SimulationResult run();

    std::size_t population_count() const { return pops_.size(); }
    std::size_t population_size(std::size_t p) const { return cfg_.populations[p].size; }
    std::size_t population_offset(std::size_t p) const { return offsets_[p]; }
    std::span<const Real> v(std::size_t p) const;
    const SpikeVector& spikes(std::size_t p) const;

    const Comm& comm(std::size_t proj) const { return projs_[proj].spec.comm; }
    const ProjectionSpec& projection(std::size_t proj) const { return projs_[proj].spec; }
    std::size_t projection_group(std::size_t proj) const { return projs_[proj].group; }
    const MergeRegistry& registry() const { return registry_; }

    StateBytes state_bytes() const;
    nlohmann::json manifest() const;

private:
    struct Population {
        std::variant<LifState, GifState> state;
        LifParams lif;
        GifParams gif;
        DelayBuffer delay;
        std::vector<Real> current;
        std::uint64_t v_seed = 0;
        std::uint64_t tau_seed = 0;
    };
    struct Projection {
        ProjectionSpec spec;
        std::size_t group = 0;
        std::uint64_t seed = 0;
        std::vector<Real> scratch;
    };
    struct MonitorSlot {
        MonitorConfig cfg;
        std::size_t pop;
        std::size_t first_column;
    };

    void record();

    NetworkConfig cfg_;
    Exec exec_;
    std::vector<Population> pops_;
    std::vector<std::size_t> offsets_;
    std::vector<Projection> projs_;
    MergeRegistry registry_;
    std::vector<std::uint64_t> input_seeds_;
    std::vector<MonitorSlot> monitors_;
    std::vector<bool> raster_pop_;
    std::size_t step_ = 0;
    SimulationResult result_;
};

/// Builds and runs the network.
SimulationResult simulate(const NetworkConfig& cfg);

/// Analytic state bytes of the built network.
StateBytes state_byte_count(const Network& net);
StateBytes state_byte_count(const NetworkConfig& cfg);

}  // namespace spikekern
