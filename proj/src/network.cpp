#include "spikekern/network.hpp"

#include <chrono>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "spikekern/counter_rng.hpp"
#include "spikekern/csr_io.hpp"

namespace spikekern {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

json StateBytes::to_json() const
{
    return {{"neurons", neurons}, {"synapses", synapses}, {"comm", comm}, {"delays", delays}, {"total", total()}};
}

void SimulationResult::write_raster(std::ostream& os) const
{
    for (const auto& e : raster) os << e.step << '\t' << e.neuron << '\n';
}

void SimulationResult::write_traces(std::ostream& os) const
{
    os << "step";
    for (const auto& n : trace_names) os << ',' << n;
    os << '\n';
    std::ostringstream line;
    line.precision(17);
    for (std::size_t s = 0; s < steps; ++s) {
        line.str("");
        line << s;
        for (const auto& col : traces) line << ',' << col[s];
        os << line.str() << '\n';
    }
}

std::vector<SpikeEvent> read_raster(std::istream& is)
{
    std::vector<SpikeEvent> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        SpikeEvent e{};
        if (!(ls >> e.step >> e.neuron)) throw ValidationError("raster line " + std::to_string(lineno) + " malformed");
        out.push_back(e);
    }
    return out;
}

namespace {

Comm build_comm(const ProjectionConfig& pc, std::size_t pre_n, std::size_t post_n, std::uint64_t seed)
{
    const auto rows = static_cast<Index>(pre_n);
    const auto cols = static_cast<Index>(post_n);
    switch (pc.comm.kind) {
    case CommKind::JitConn: return make_jitconn_spec(rows, cols, pc.comm.prob, pc.comm.dist, seed);
    case CommKind::Sparse: return materialize(make_jitconn_spec(rows, cols, pc.comm.prob, pc.comm.dist, seed));
    case CommKind::Dense:
        return materialize(make_jitconn_spec(rows, cols, pc.comm.prob, pc.comm.dist, seed)).densify();
    case CommKind::CsrFile: return load_csr(pc.comm.path);
    case CommKind::EdgeFile: return load_edge_list(pc.comm.path, Shape{rows, cols});
    case CommKind::Explicit: return *pc.comm.matrix;
    }
    throw ValidationError("unknown comm kind");
}

template <class F>
void timed(double& acc, F&& f)
{
    const auto t0 = Clock::now();
    f();
    acc += std::chrono::duration<double>(Clock::now() - t0).count();
}

const char* signal_name(MonitorConfig::Signal s)
{
    switch (s) {
    case MonitorConfig::Signal::Spikes: return "spikes";
    case MonitorConfig::Signal::V: return "v";
    case MonitorConfig::Signal::Rate: return "rate";
    }
    return "?";
}

}  // namespace

Network::Network(NetworkConfig cfg) : cfg_(std::move(cfg)), exec_{cfg_.threads}, registry_(cfg_.merge)
{
    cfg_.validate();
    const std::size_t n_pop = cfg_.populations.size();

    std::vector<std::size_t> max_delay(n_pop, 0);
    for (const auto& pc : cfg_.projections) {
        auto& d = max_delay[cfg_.population_index(pc.pre)];
        d = std::max(d, pc.delay_steps);
    }

    std::size_t offset = 0;
    for (std::size_t i = 0; i < n_pop; ++i) {
        const auto& pc = cfg_.populations[i];
        Population p;
        p.v_seed = derive_seed(cfg_.seed, "pop.v_init", i);
        p.tau_seed = derive_seed(cfg_.seed, "pop.tau_i2", i);
        std::vector<Real> v0(pc.size, pc.v_init.mean);
        if (pc.v_init.kind == VInit::Kind::Normal) {
            for (std::size_t k = 0; k < pc.size; ++k)
                v0[k] = static_cast<Real>(RowSampler(p.v_seed, k).normal(pc.v_init.mean, pc.v_init.std));
        }
        if (pc.model == NeuronModel::Lif) {
            p.lif = pc.lif;
            LifState s(pc.size, 0);
            s.v = std::move(v0);
            p.state = std::move(s);
        } else {
            p.gif = pc.gif;
            if (p.gif.tau_i2.empty()) p.gif.tau_i2 = sample_tau_i2(pc.size, p.tau_seed, pc.tau_i2_low, pc.tau_i2_high);
            p.gif.validate(pc.size);
            GifState s(pc.size, 0);
            s.v = std::move(v0);
            p.state = std::move(s);
        }
        p.delay = DelayBuffer(pc.size, max_delay[i]);
        p.current.assign(pc.size, Real{0});
        pops_.push_back(std::move(p));
        offsets_.push_back(offset);
        offset += pc.size;
    }

    for (std::size_t j = 0; j < cfg_.projections.size(); ++j) {
        const auto& pc = cfg_.projections[j];
        Projection pr;
        pr.seed = pc.comm.seed ? *pc.comm.seed : derive_seed(cfg_.seed, "proj.comm", j);
        pr.spec.pre = cfg_.population_index(pc.pre);
        pr.spec.post = cfg_.population_index(pc.post);
        pr.spec.comm = build_comm(pc, population_size(pr.spec.pre), population_size(pr.spec.post), pr.seed);
        pr.spec.delay_steps = pc.delay_steps;
        pr.spec.syn_tau = pc.tau;
        pr.spec.out = pc.out;
        pr.spec.mode = pc.mode;
        pr.spec.name = pc.name;
        pr.spec.validate(population_size(pr.spec.pre), population_size(pr.spec.post));
        const auto key = MergeKey::of(pr.spec);
        const std::size_t state_size = population_size(key.population);
        pr.group = registry_.insert(key, state_size, pc.tau, pc.out).handle;
        pr.scratch.assign(population_size(pr.spec.post), Real{0});
        projs_.push_back(std::move(pr));
    }

    for (std::size_t k = 0; k < cfg_.inputs.size(); ++k) input_seeds_.push_back(derive_seed(cfg_.seed, "input", k));

    raster_pop_.assign(n_pop, false);
    for (const auto& m : cfg_.monitors) {
        const std::size_t p = cfg_.population_index(m.target);
        MonitorSlot slot{m, p, result_.trace_names.size()};
        if (slot.cfg.name.empty()) slot.cfg.name = m.target + "." + signal_name(m.signal);
        switch (m.signal) {
        case MonitorConfig::Signal::Spikes: raster_pop_[p] = true; break;
        case MonitorConfig::Signal::V:
            if (m.neurons.empty()) result_.trace_names.push_back(slot.cfg.name);
            for (auto i : m.neurons) result_.trace_names.push_back(slot.cfg.name + "[" + std::to_string(i) + "]");
            break;
        case MonitorConfig::Signal::Rate: result_.trace_names.push_back(slot.cfg.name); break;
        }
        monitors_.push_back(std::move(slot));
    }
    result_.traces.assign(result_.trace_names.size(), {});
    for (auto& col : result_.traces) col.reserve(cfg_.n_steps());
    result_.spike_counts.assign(n_pop, 0);
    result_.dt = cfg_.dt;
}

std::span<const Real> Network::v(std::size_t p) const
{
    return std::visit([](const auto& s) { return std::span<const Real>(s.v); }, pops_.at(p).state);
}

const SpikeVector& Network::spikes(std::size_t p) const
{
    return std::visit([](const auto& s) -> const SpikeVector& { return s.spike; }, pops_.at(p).state);
}

void Network::step()
{
    const auto s = static_cast<std::int64_t>(step_);
    const double dt = cfg_.dt;
    const double t = static_cast<double>(step_) * dt;
    auto& timing = result_.timing;

    timed(timing.synapses, [&] {
        for (auto& shared : registry_.states()) shared.advance(s, dt);
        for (auto& pr : projs_) {
            const SpikeVector& delayed = pops_[pr.spec.pre].delay.read(pr.spec.delay_steps);
            auto& shared = registry_.at(pr.group);
            if (pr.spec.mode == AlignMode::Post) align_post_deliver(pr.spec, shared, delayed, s, dt, pr.scratch, exec_);
            else align_pre_deliver(pr.spec, shared, delayed, s, dt);
        }
    });

    timed(timing.currents, [&] {
        for (auto& p : pops_) std::fill(p.current.begin(), p.current.end(), Real{0});
        for (std::size_t k = 0; k < cfg_.inputs.size(); ++k) {
            const auto& in = cfg_.inputs[k];
            auto& cur = pops_[cfg_.population_index(in.target)].current;
            if (in.kind == InputConfig::Kind::Constant) {
                for (auto& c : cur) c += in.value;
            } else {
                const double p = in.rate_hz * dt / 1000.0;
                RowSampler rng(input_seeds_[k], step_);
                for (auto& c : cur)
                    if (rng.uniform01() < p) c += in.weight;
            }
        }
        for (const auto& shared : registry_.states()) {
            if (shared.key().mode != AlignMode::Post) continue;
            const std::size_t post = shared.key().population;
            align_post_current(shared, v(post), pops_[post].current);
        }
        for (auto& pr : projs_) {
            if (pr.spec.mode != AlignMode::Pre) continue;
            align_pre_current(pr.spec, registry_.at(pr.group), v(pr.spec.post), pops_[pr.spec.post].current,
                              pr.scratch, exec_);
        }
    });

    timed(timing.neurons, [&] {
        for (std::size_t i = 0; i < pops_.size(); ++i) {
            auto& p = pops_[i];
            if (auto* lif = std::get_if<LifState>(&p.state)) lif_step(*lif, p.lif, p.current, t, dt);
            else gif_step(std::get<GifState>(p.state), p.gif, p.current, dt);
            for (Real x : v(i)) {
                if (!std::isfinite(x))
                    throw NumericalError("non-finite membrane potential in population '" + cfg_.populations[i].id +
                                         "' at step " + std::to_string(step_));
            }
        }
    });

    timed(timing.record, [&] {
        for (std::size_t i = 0; i < pops_.size(); ++i) pops_[i].delay.write(spikes(i));
        record();
    });
    ++step_;
}

void Network::record()
{
    for (std::size_t i = 0; i < pops_.size(); ++i) {
        const auto bits = spikes(i).bits();
        std::uint64_t n = 0;
        for (std::size_t k = 0; k < bits.size(); ++k) {
            if (!bits[k]) continue;
            ++n;
            if (raster_pop_[i]) result_.raster.push_back({step_, offsets_[i] + k});
        }
        result_.spike_counts[i] += n;
    }
    for (const auto& m : monitors_) {
        switch (m.cfg.signal) {
        case MonitorConfig::Signal::Spikes: break;
        case MonitorConfig::Signal::V: {
            const auto vs = v(m.pop);
            if (m.cfg.neurons.empty()) {
                double sum = 0;
                for (Real x : vs) sum += x;
                result_.traces[m.first_column].push_back(sum / static_cast<double>(vs.size()));
            }
            for (std::size_t c = 0; c < m.cfg.neurons.size(); ++c)
                result_.traces[m.first_column + c].push_back(vs[m.cfg.neurons[c]]);
            break;
        }
        case MonitorConfig::Signal::Rate: {
            const double count = static_cast<double>(spikes(m.pop).count());
            const double size = static_cast<double>(population_size(m.pop));
            result_.traces[m.first_column].push_back(count / size / (cfg_.dt / 1000.0));
            break;
        }
        }
    }
}

SimulationResult Network::run()
{
    while (!done()) step();
    result_.steps = step_;
    result_.bytes = state_bytes();
    result_.manifest = manifest();
    return std::move(result_);
}

StateBytes Network::state_bytes() const
{
    StateBytes b;
    for (const auto& p : pops_) {
        const std::size_t n = std::visit([](const auto& s) { return s.size(); }, p.state);
        if (std::holds_alternative<LifState>(p.state)) b.neurons += n * (2 * sizeof(Real) + 1);
        else b.neurons += n * (4 * sizeof(Real) + 1);
        b.delays += p.delay.state_bytes();
    }
    b.synapses = registry_.total_scalars() * sizeof(Real);
    for (const auto& pr : projs_) b.comm += comm_state_bytes(pr.spec.comm);
    return b;
}

json Network::manifest() const
{
    json seeds;
    seeds["master"] = cfg_.seed;
    seeds["populations"] = json::object();
    for (std::size_t i = 0; i < pops_.size(); ++i) {
        json s{{"v_init", pops_[i].v_seed}};
        if (cfg_.populations[i].model == NeuronModel::Gif) s["tau_i2"] = pops_[i].tau_seed;
        seeds["populations"][cfg_.populations[i].id] = s;
    }
    seeds["projections"] = json::object();
    for (const auto& pr : projs_) seeds["projections"][pr.spec.name] = pr.seed;
    seeds["inputs"] = input_seeds_;

    json groups = json::array();
    for (const auto& g : registry_.states()) {
        groups.push_back({{"mode", g.key().mode == AlignMode::Post ? "post" : "pre"},
                          {"population", cfg_.populations[g.key().population].id},
                          {"tau", g.key().tau},
                          {"size", g.size()}});
    }
    json projections = json::array();
    for (const auto& pr : projs_) {
        json p{{"name", pr.spec.name}, {"comm", comm_kind_name(pr.spec.comm)}, {"group", pr.group}};
        if (const auto* jit = std::get_if<JitConnSpec>(&pr.spec.comm)) {
            p["prob"] = jit->prob;
            p["effective_prob"] = jit->effective_prob();
            p["gap_bound"] = jit->gap_bound();
        } else if (const auto* csr = std::get_if<CsrMatrix>(&pr.spec.comm)) {
            p["nnz"] = csr->nnz();
        }
        projections.push_back(p);
    }
    return {{"config", network_config_to_json(cfg_)},
            {"seeds", seeds},
            {"steps", cfg_.n_steps()},
            {"merge_groups", groups},
            {"resolved_projections", projections},
            {"state_bytes", state_bytes().to_json()}};
}

SimulationResult simulate(const NetworkConfig& cfg)
{
    Network net(cfg);
    return net.run();
}

StateBytes state_byte_count(const Network& net) { return net.state_bytes(); }

StateBytes state_byte_count(const NetworkConfig& cfg) { return Network(cfg).state_bytes(); }

}  // namespace spikekern
