#include "spikekern/network_config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "spikekern/log.hpp"

namespace spikekern {

using nlohmann::json;

std::size_t NetworkConfig::n_steps() const
{
    return static_cast<std::size_t>(std::llround(duration / dt));
}

std::size_t NetworkConfig::population_index(const std::string& id) const
{
    for (std::size_t i = 0; i < populations.size(); ++i)
        if (populations[i].id == id) return i;
    throw ValidationError("unknown population '" + id + "'");
}

void NetworkConfig::validate() const
{
    if (!(dt > 0) || !std::isfinite(dt)) throw ValidationError("dt must be > 0");
    if (!(duration >= 0) || !std::isfinite(duration)) throw ValidationError("duration must be >= 0");
    if (threads == 0) throw ValidationError("threads must be >= 1");
    std::set<std::string> ids;
    for (const auto& p : populations) {
        if (p.id.empty()) throw ValidationError("population without id");
        if (!ids.insert(p.id).second) throw ValidationError("duplicate population id '" + p.id + "'");
        if (p.size == 0) throw ValidationError("population '" + p.id + "' has size 0");
        if (p.v_init.kind == VInit::Kind::Normal && !(p.v_init.std >= 0))
            throw ValidationError("population '" + p.id + "': v_init std must be >= 0");
        if (p.model == NeuronModel::Lif) {
            p.lif.validate();
        } else {
            if (!(p.gif.tau_i1 > 0 && p.gif.tau_v > 0)) throw ValidationError("GIF time constants must be > 0");
            if (!p.gif.tau_i2.empty()) p.gif.validate(p.size);
            else if (!(p.tau_i2_low > 0 && p.tau_i2_high >= p.tau_i2_low))
                throw ValidationError("population '" + p.id + "': bad tau_i2 range");
        }
    }
    std::set<std::string> names;
    for (const auto& pr : projections) {
        population_index(pr.pre);
        population_index(pr.post);
        if (!pr.name.empty() && !names.insert(pr.name).second)
            throw ValidationError("duplicate projection name '" + pr.name + "'");
        if (!(pr.tau > 0)) throw ValidationError("projection '" + pr.name + "': tau must be > 0");
        const auto k = pr.comm.kind;
        if ((k == CommKind::JitConn || k == CommKind::Sparse || k == CommKind::Dense) &&
            !(pr.comm.prob > 0 && pr.comm.prob <= 1))
            throw ValidationError("projection '" + pr.name + "': prob must be in (0, 1]");
        if (k == CommKind::Explicit && !pr.comm.matrix)
            throw ValidationError("projection '" + pr.name + "': explicit comm without a matrix");
        if ((k == CommKind::CsrFile || k == CommKind::EdgeFile) && pr.comm.path.empty())
            throw ValidationError("projection '" + pr.name + "': file comm without a path");
    }
    for (const auto& in : inputs) {
        population_index(in.target);
        if (in.kind == InputConfig::Kind::Poisson && !(in.rate_hz >= 0 && in.rate_hz * dt / 1000.0 <= 1.0))
            throw ValidationError("poisson input rate must satisfy 0 <= rate * dt / 1000 <= 1");
    }
    std::set<std::string> columns;
    for (const auto& m : monitors) {
        const auto& pop = populations[population_index(m.target)];
        for (auto i : m.neurons)
            if (i >= pop.size) throw ValidationError("monitor neuron " + std::to_string(i) + " out of range");
        if (!m.name.empty() && !columns.insert(m.name).second)
            throw ValidationError("duplicate monitor name '" + m.name + "'");
    }
}

namespace {

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where)
{
    if (!obj.is_object()) throw ValidationError(where + ": expected an object");
    for (const auto& item : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return item.key() == a; }))
            throw ValidationError(where + ": unknown key '" + item.key() + "'");
    }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where)
{
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ValidationError(where + ": bad value for '" + key + "'");
    }
}

template <class T>
T get_req(const json& obj, const char* key, const std::string& where)
{
    if (!obj.contains(key)) throw ValidationError(where + ": missing '" + key + "'");
    return get_or<T>(obj, key, T{}, where);
}

WeightDist parse_weight(const json& w, const std::string& where)
{
    if (w.is_number()) return HomoDist{w.get<Real>()};
    check_keys(w, {"dist", "w", "low", "high", "mu", "sigma"}, where + ".weight");
    const auto dist = lower(get_or<std::string>(w, "dist", "homo", where));
    if (dist == "homo") return HomoDist{get_req<Real>(w, "w", where)};
    if (dist == "uniform") return UniformDist{get_req<Real>(w, "low", where), get_req<Real>(w, "high", where)};
    if (dist == "normal") return NormalDist{get_req<Real>(w, "mu", where), get_req<Real>(w, "sigma", where)};
    throw ValidationError(where + ": unknown weight dist '" + dist + "'");
}

json weight_to_json(const WeightDist& d)
{
    return std::visit(
        [](const auto& x) -> json {
            using D = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<D, HomoDist>) return {{"dist", "homo"}, {"w", x.w}};
            else if constexpr (std::is_same_v<D, UniformDist>)
                return {{"dist", "uniform"}, {"low", x.w_low}, {"high", x.w_high}};
            else return {{"dist", "normal"}, {"mu", x.w_mu}, {"sigma", x.w_sigma}};
        },
        d);
}

const char* comm_kind_str(CommKind k)
{
    switch (k) {
    case CommKind::JitConn: return "jitconn";
    case CommKind::Sparse: return "sparse";
    case CommKind::Dense: return "dense";
    case CommKind::CsrFile: return "csr_file";
    case CommKind::EdgeFile: return "edge_file";
    case CommKind::Explicit: return "explicit";
    }
    return "?";
}

PopulationConfig parse_population(const json& j, std::size_t idx)
{
    const std::string where = "populations[" + std::to_string(idx) + "]";
    check_keys(j, {"id", "model", "size", "params", "v_init"}, where);
    PopulationConfig p;
    p.id = get_req<std::string>(j, "id", where);
    p.size = get_req<std::size_t>(j, "size", where);
    const auto model = lower(get_or<std::string>(j, "model", "lif", where));
    if (model == "lif") p.model = NeuronModel::Lif;
    else if (model == "gif") p.model = NeuronModel::Gif;
    else throw ValidationError(where + ": unknown model '" + model + "'");

    const json params = j.value("params", json::object());
    if (p.model == NeuronModel::Lif) {
        check_keys(params, {"v_rest", "v_reset", "v_th", "tau", "tau_ref", "r"}, where + ".params");
        auto& l = p.lif;
        l.v_rest = get_or(params, "v_rest", l.v_rest, where);
        l.v_reset = get_or(params, "v_reset", l.v_reset, where);
        l.v_th = get_or(params, "v_th", l.v_th, where);
        l.tau = get_or(params, "tau", l.tau, where);
        l.tau_ref = get_or(params, "tau_ref", l.tau_ref, where);
        l.r = get_or(params, "r", l.r, where);
        p.v_init.mean = l.v_rest;
    } else {
        check_keys(params, {"a1", "a2", "tau_i1", "tau_i2", "tau_v", "v_rest", "v_th", "r"}, where + ".params");
        auto& g = p.gif;
        g.a1 = get_or(params, "a1", g.a1, where);
        g.a2 = get_or(params, "a2", g.a2, where);
        g.tau_i1 = get_or(params, "tau_i1", g.tau_i1, where);
        g.tau_v = get_or(params, "tau_v", g.tau_v, where);
        g.v_rest = get_or(params, "v_rest", g.v_rest, where);
        g.v_th = get_or(params, "v_th", g.v_th, where);
        g.r = get_or(params, "r", g.r, where);
        if (auto it = params.find("tau_i2"); it != params.end()) {
            if (it->is_number()) {
                g.tau_i2.assign(p.size, it->get<Real>());
            } else if (it->is_array()) {
                g.tau_i2 = it->get<std::vector<Real>>();
            } else {
                check_keys(*it, {"low", "high"}, where + ".params.tau_i2");
                p.tau_i2_low = get_req<Real>(*it, "low", where);
                p.tau_i2_high = get_req<Real>(*it, "high", where);
            }
        }
        p.v_init.mean = g.v_rest;
    }

    if (auto it = j.find("v_init"); it != j.end()) {
        if (it->is_number()) {
            p.v_init = {VInit::Kind::Const, it->get<Real>(), 0};
        } else {
            check_keys(*it, {"kind", "value", "mean", "std"}, where + ".v_init");
            const auto kind = lower(get_req<std::string>(*it, "kind", where));
            if (kind == "const") p.v_init = {VInit::Kind::Const, get_req<Real>(*it, "value", where), 0};
            else if (kind == "normal")
                p.v_init = {VInit::Kind::Normal, get_req<Real>(*it, "mean", where), get_req<Real>(*it, "std", where)};
            else throw ValidationError(where + ": unknown v_init kind '" + kind + "'");
        }
    }
    return p;
}

ProjectionConfig parse_projection(const json& j, std::size_t idx, const std::filesystem::path& base_dir)
{
    const std::string where = "projections[" + std::to_string(idx) + "]";
    check_keys(j, {"name", "pre", "post", "comm", "delay_steps", "tau", "output", "mode"}, where);
    ProjectionConfig p;
    p.name = get_or<std::string>(j, "name", "proj" + std::to_string(idx), where);
    p.pre = get_req<std::string>(j, "pre", where);
    p.post = get_req<std::string>(j, "post", where);
    p.delay_steps = get_or<std::size_t>(j, "delay_steps", 0, where);
    p.tau = get_or(j, "tau", p.tau, where);

    const auto mode = lower(get_or<std::string>(j, "mode", "post", where));
    if (mode == "post") p.mode = AlignMode::Post;
    else if (mode == "pre") p.mode = AlignMode::Pre;
    else throw ValidationError(where + ": mode must be 'pre' or 'post'");

    if (auto it = j.find("output"); it != j.end()) {
        check_keys(*it, {"kind", "e_rev"}, where + ".output");
        const auto kind = lower(get_req<std::string>(*it, "kind", where));
        if (kind == "coba") p.out = Coba{get_req<Real>(*it, "e_rev", where)};
        else if (kind == "cuba") p.out = Cuba{};
        else throw ValidationError(where + ": unknown output kind '" + kind + "'");
    }

    const json& c = j.contains("comm") ? j.at("comm") : throw ValidationError(where + ": missing 'comm'");
    check_keys(c, {"kind", "prob", "weight", "seed", "path"}, where + ".comm");
    const auto kind = lower(get_or<std::string>(c, "kind", "jitconn", where));
    if (kind == "jitconn") p.comm.kind = CommKind::JitConn;
    else if (kind == "sparse") p.comm.kind = CommKind::Sparse;
    else if (kind == "dense") p.comm.kind = CommKind::Dense;
    else if (kind == "csr_file") p.comm.kind = CommKind::CsrFile;
    else if (kind == "edge_file") p.comm.kind = CommKind::EdgeFile;
    else throw ValidationError(where + ": unknown comm kind '" + kind + "'");
    p.comm.prob = get_or(c, "prob", p.comm.prob, where);
    if (auto it = c.find("weight"); it != c.end()) p.comm.dist = parse_weight(*it, where + ".comm");
    if (c.contains("seed")) p.comm.seed = get_req<std::uint64_t>(c, "seed", where);
    if (c.contains("path")) {
        std::filesystem::path path = get_req<std::string>(c, "path", where);
        p.comm.path = path.is_relative() && !base_dir.empty() ? base_dir / path : path;
    }
    return p;
}

InputConfig parse_input(const json& j, std::size_t idx)
{
    const std::string where = "inputs[" + std::to_string(idx) + "]";
    check_keys(j, {"target", "kind", "value", "rate_hz", "weight"}, where);
    InputConfig in;
    in.target = get_req<std::string>(j, "target", where);
    const auto kind = lower(get_or<std::string>(j, "kind", "constant", where));
    if (kind == "constant") {
        in.kind = InputConfig::Kind::Constant;
        in.value = get_req<Real>(j, "value", where);
    } else if (kind == "poisson") {
        in.kind = InputConfig::Kind::Poisson;
        in.rate_hz = get_req<double>(j, "rate_hz", where);
        in.weight = get_or(j, "weight", in.weight, where);
    } else {
        throw ValidationError(where + ": unknown input kind '" + kind + "'");
    }
    return in;
}

MonitorConfig parse_monitor(const json& j, std::size_t idx)
{
    const std::string where = "monitors[" + std::to_string(idx) + "]";
    check_keys(j, {"target", "signal", "name", "neurons"}, where);
    MonitorConfig m;
    m.target = get_req<std::string>(j, "target", where);
    const auto signal = lower(get_or<std::string>(j, "signal", "spikes", where));
    if (signal == "spikes") m.signal = MonitorConfig::Signal::Spikes;
    else if (signal == "v") m.signal = MonitorConfig::Signal::V;
    else if (signal == "rate") m.signal = MonitorConfig::Signal::Rate;
    else throw ValidationError(where + ": unknown signal '" + signal + "'");
    m.name = get_or<std::string>(j, "name", "", where);
    m.neurons = get_or<std::vector<std::size_t>>(j, "neurons", {}, where);
    return m;
}

}  // namespace

NetworkConfig network_config_from_json(const json& doc, const std::filesystem::path& base_dir)
{
    check_keys(doc, {"dt", "duration", "seed", "merge", "threads", "populations", "projections", "inputs", "monitors"},
               "config");
    NetworkConfig cfg;
    cfg.dt = get_or(doc, "dt", cfg.dt, "config");
    cfg.duration = get_or(doc, "duration", cfg.duration, "config");
    cfg.seed = get_or(doc, "seed", cfg.seed, "config");
    cfg.merge = get_or(doc, "merge", cfg.merge, "config");
    cfg.threads = get_or(doc, "threads", cfg.threads, "config");
    auto list = [&](const char* key) {
        json arr = doc.value(key, json::array());
        if (!arr.is_array()) throw ValidationError(std::string("config: '") + key + "' must be a list");
        return arr;
    };
    const json pops = list("populations");
    for (std::size_t i = 0; i < pops.size(); ++i) cfg.populations.push_back(parse_population(pops[i], i));
    const json projs = list("projections");
    for (std::size_t i = 0; i < projs.size(); ++i) cfg.projections.push_back(parse_projection(projs[i], i, base_dir));
    const json ins = list("inputs");
    for (std::size_t i = 0; i < ins.size(); ++i) cfg.inputs.push_back(parse_input(ins[i], i));
    const json mons = list("monitors");
    for (std::size_t i = 0; i < mons.size(); ++i) cfg.monitors.push_back(parse_monitor(mons[i], i));
    cfg.validate();
    return cfg;
}

NetworkConfig load_network_config(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(is, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return network_config_from_json(doc, path.parent_path());
}

json network_config_to_json(const NetworkConfig& cfg)
{
    json doc;
    doc["dt"] = cfg.dt;
    doc["duration"] = cfg.duration;
    doc["seed"] = cfg.seed;
    doc["merge"] = cfg.merge;
    doc["threads"] = cfg.threads;
    doc["populations"] = json::array();
    for (const auto& p : cfg.populations) {
        json j{{"id", p.id}, {"size", p.size}};
        if (p.model == NeuronModel::Lif) {
            const auto& l = p.lif;
            j["model"] = "LIF";
            j["params"] = {{"v_rest", l.v_rest}, {"v_reset", l.v_reset}, {"v_th", l.v_th},
                           {"tau", l.tau},       {"tau_ref", l.tau_ref}, {"r", l.r}};
        } else {
            const auto& g = p.gif;
            j["model"] = "GIF";
            j["params"] = {{"a1", g.a1},         {"a2", g.a2},         {"tau_i1", g.tau_i1}, {"tau_v", g.tau_v},
                           {"v_rest", g.v_rest}, {"v_th", g.v_th},     {"r", g.r}};
            if (g.tau_i2.empty()) j["params"]["tau_i2"] = {{"low", p.tau_i2_low}, {"high", p.tau_i2_high}};
            else j["params"]["tau_i2"] = g.tau_i2;
        }
        if (p.v_init.kind == VInit::Kind::Const) j["v_init"] = {{"kind", "const"}, {"value", p.v_init.mean}};
        else j["v_init"] = {{"kind", "normal"}, {"mean", p.v_init.mean}, {"std", p.v_init.std}};
        doc["populations"].push_back(j);
    }
    doc["projections"] = json::array();
    for (const auto& p : cfg.projections) {
        json c{{"kind", comm_kind_str(p.comm.kind)}};
        switch (p.comm.kind) {
        case CommKind::JitConn:
        case CommKind::Sparse:
        case CommKind::Dense:
            c["prob"] = p.comm.prob;
            c["weight"] = weight_to_json(p.comm.dist);
            if (p.comm.seed) c["seed"] = *p.comm.seed;
            break;
        case CommKind::CsrFile:
        case CommKind::EdgeFile: c["path"] = p.comm.path.string(); break;
        case CommKind::Explicit:
            c["matrix_kind"] = comm_kind_name(*p.comm.matrix);
            c["shape"] = {comm_pre_size(*p.comm.matrix), comm_post_size(*p.comm.matrix)};
            break;
        }
        json out;
        if (const auto* coba = std::get_if<Coba>(&p.out)) out = {{"kind", "coba"}, {"e_rev", coba->e_rev}};
        else out = {{"kind", "cuba"}};
        doc["projections"].push_back({{"name", p.name},
                                      {"pre", p.pre},
                                      {"post", p.post},
                                      {"comm", c},
                                      {"delay_steps", p.delay_steps},
                                      {"tau", p.tau},
                                      {"output", out},
                                      {"mode", p.mode == AlignMode::Post ? "post" : "pre"}});
    }
    doc["inputs"] = json::array();
    for (const auto& in : cfg.inputs) {
        if (in.kind == InputConfig::Kind::Constant)
            doc["inputs"].push_back({{"target", in.target}, {"kind", "constant"}, {"value", in.value}});
        else
            doc["inputs"].push_back(
                {{"target", in.target}, {"kind", "poisson"}, {"rate_hz", in.rate_hz}, {"weight", in.weight}});
    }
    doc["monitors"] = json::array();
    for (const auto& m : cfg.monitors) {
        static constexpr const char* names[] = {"spikes", "v", "rate"};
        json j{{"target", m.target}, {"signal", names[static_cast<int>(m.signal)]}};
        if (!m.name.empty()) j["name"] = m.name;
        if (!m.neurons.empty()) j["neurons"] = m.neurons;
        doc["monitors"].push_back(j);
    }
    return doc;
}

NetworkConfig build_ei_net(double scale, CommKind comm_kind, std::uint64_t seed, double duration_ms, double dt)
{
    if (!(scale > 0) || !std::isfinite(scale)) throw ValidationError("EI net scale must be > 0");
    const auto n_exc = static_cast<std::size_t>(3200 * scale);
    const auto n_inh = static_cast<std::size_t>(800 * scale);
    const auto num = static_cast<std::size_t>(4000 * scale);
    if (n_exc == 0 || n_inh == 0)
        throw ValidationError("EI net scale " + std::to_string(scale) + " gives an empty population");
    double prob = 80.0 / static_cast<double>(num);
    if (prob > 1.0) {
        warn("EI net connection probability " + std::to_string(prob) + " clamped to 1");
        prob = 1.0;
    }

    NetworkConfig cfg;
    cfg.dt = dt;
    cfg.duration = duration_ms;
    cfg.seed = seed;

    for (auto [id, n] : {std::pair{"E", n_exc}, std::pair{"I", n_inh}}) {
        PopulationConfig p;
        p.id = id;
        p.size = n;
        p.v_init = {VInit::Kind::Normal, -55, 2};
        cfg.populations.push_back(p);
        cfg.inputs.push_back({InputConfig::Kind::Constant, id, 20, 0, 1});
        cfg.monitors.push_back({MonitorConfig::Signal::Spikes, id, "", {}});
        cfg.monitors.push_back({MonitorConfig::Signal::Rate, id, "", {}});
    }

    struct Side {
        const char* id;
        Real weight;
        Real tau;
        Real e_rev;
    };
    const Side exc{"E", Real(0.6), 5, 0};
    const Side inh{"I", Real(6.7), 10, -80};
    for (const Side& pre : {exc, inh}) {
        for (const char* post : {"E", "I"}) {
            ProjectionConfig pr;
            pr.name = std::string(pre.id) + post;
            pr.pre = pre.id;
            pr.post = post;
            pr.comm.kind = comm_kind;
            pr.comm.prob = prob;
            pr.comm.dist = HomoDist{pre.weight};
            pr.tau = pre.tau;
            pr.out = Coba{pre.e_rev};
            pr.mode = AlignMode::Post;
            cfg.projections.push_back(pr);
        }
    }
    cfg.validate();
    return cfg;
}

}  // namespace spikekern
