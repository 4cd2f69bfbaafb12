#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "spikekern/bench.hpp"
#include "spikekern/network.hpp"
#include "spikekern/reservoir.hpp"

namespace spikekern {

using nlohmann::json;

namespace {

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback)
{
    if (flag) return *flag;
    if (const char* env = std::getenv("SPIKEKERN_SEED"); env && *env) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(env, &used, 0);
            if (used == std::string(env).size()) return v;
        } catch (const std::exception&) {
        }
        throw ValidationError(std::string("SPIKEKERN_SEED is not an unsigned integer: ") + env);
    }
    return fallback;
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot write " + path);
    return os;
}

std::pair<std::size_t, std::size_t> parse_shape(const std::string& s)
{
    auto to_size = [&](const std::string& part) {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(part, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != part.size() || v == 0) throw ValidationError("bad shape '" + s + "'");
        return static_cast<std::size_t>(v);
    };
    const auto x = s.find_first_of("xX");
    if (x == std::string::npos) {
        const auto n = to_size(s);
        return {n, n};
    }
    return {to_size(s.substr(0, x)), to_size(s.substr(x + 1))};
}

void print_table(std::ostream& out, const std::vector<BenchResult>& rs)
{
    out << std::left << std::setw(22) << "kernel" << std::setw(34) << "case" << std::right << std::setw(14)
        << "median_us" << std::setw(14) << "p10_us" << std::setw(14) << "p90_us" << std::setw(16) << "state_bytes"
        << "  note\n";
    for (const auto& r : rs) {
        out << std::left << std::setw(22) << r.kernel << std::setw(34) << r.case_id << std::right << std::fixed
            << std::setprecision(2);
        if (r.skipped) out << std::setw(14) << "-" << std::setw(14) << "-" << std::setw(14) << "-";
        else
            out << std::setw(14) << r.timing.median_ns / 1e3 << std::setw(14) << r.timing.p10_ns / 1e3
                << std::setw(14) << r.timing.p90_ns / 1e3;
        out << std::setw(16) << r.state_bytes << "  " << r.note << '\n';
        out.unsetf(std::ios::floatfield);
    }
}

void emit_bench(std::ostream& out, const std::vector<BenchResult>& rs, const std::string& csv_path, bool as_json)
{
    if (!csv_path.empty()) {
        auto os = open_out(csv_path);
        write_bench_csv(os, rs);
    }
    if (as_json) out << bench_results_json(rs).dump(2) << '\n';
    else print_table(out, rs);
}

struct Common {
    std::string out;
    bool json = false;
    unsigned threads = 1;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c, const char* out_help)
{
    cmd->add_option("--out", c.out, out_help);
    cmd->add_flag("--json", c.json, "Print a machine-readable JSON summary instead of text");
    cmd->add_option("--threads", c.threads, "Worker threads for kernels (1 = deterministic sequential mode)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", c.seed, "Master seed (default: $SPIKEKERN_SEED, else a fixed seed)");
}

json sim_summary(const SimulationResult& r, const Network& net)
{
    json pops = json::array();
    const double seconds = static_cast<double>(r.steps) * r.dt / 1000.0;
    for (std::size_t p = 0; p < net.population_count(); ++p) {
        const double n = static_cast<double>(net.population_size(p));
        pops.push_back({{"id", net.config().populations[p].id},
                        {"size", net.population_size(p)},
                        {"spikes", r.spike_counts[p]},
                        {"mean_rate_hz", seconds > 0 ? static_cast<double>(r.spike_counts[p]) / n / seconds : 0.0}});
    }
    return {{"steps", r.steps},
            {"dt", r.dt},
            {"populations", pops},
            {"raster_events", r.raster.size()},
            {"state_bytes", r.bytes.to_json()},
            {"timing_s",
             {{"synapses", r.timing.synapses},
              {"currents", r.timing.currents},
              {"neurons", r.timing.neurons},
              {"record", r.timing.record},
              {"total", r.timing.total()}}}};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Event-driven spiking kernels, JIT connectivity, network simulation and reservoir training",
                 "spikekern"};
    app.require_subcommand(1);

    // bench
    auto* bench = app.add_subcommand("bench", "Operator microbenchmarks")->require_subcommand(1);

    Common kc;
    EventBenchOptions ko;
    std::size_t k_guard_mb = ko.dense_guard_bytes >> 20;
    auto* bk = bench->add_subcommand("kernels", "dense_matvec vs csrmv vs event_csrmv over spike rates");
    add_common(bk, kc, "Write results as CSV");
    bk->add_option("--n", ko.n, "Matrix size (n x n)")->capture_default_str();
    bk->add_option("--p", ko.p, "Connection probability")->capture_default_str();
    bk->add_option("--rates", ko.rates_hz, "Firing rates in Hz")->delimiter(',')->capture_default_str();
    bk->add_option("--dt", ko.dt, "Time step in ms (event density = rate * dt / 1000)")->capture_default_str();
    bk->add_option("--reps", ko.reps, "Timed repetitions (>= 5)")->capture_default_str();
    bk->add_option("--warmup", ko.warmup, "Untimed warm-up repetitions")->capture_default_str();
    bk->add_option("--dense-guard-mb", k_guard_mb, "Memory cap for the dense baseline")->capture_default_str();

    Common jc;
    JitBenchOptions jo;
    std::string j_dist = "homo";
    double j_w1 = 1, j_w2 = 0;
    std::size_t j_sparse_mb = jo.sparse_guard_bytes >> 20, j_dense_mb = jo.dense_guard_bytes >> 20;
    auto* bj = bench->add_subcommand("jitconn", "dense vs materialized sparse vs JIT connectivity matvec");
    add_common(bj, jc, "Write results as CSV");
    std::vector<std::string> j_shapes{"1000", "10000", "100000"};
    double j_events_hz = -1;
    bj->add_option("--shape,--shapes", j_shapes, "Matrix shapes, MxN or N for square")
        ->delimiter(',')
        ->capture_default_str();
    bj->add_option("--p,--prob", jo.p, "Connection probability")->capture_default_str();
    bj->add_option("--events-hz", j_events_hz, "Time event products at this spike rate instead of y = J v");
    bj->add_option("--dt", jo.dt, "Time step in ms for --events-hz")->capture_default_str();
    bj->add_option("--dist", j_dist, "Weight distribution")
        ->check(CLI::IsMember({"homo", "uniform", "normal"}))
        ->capture_default_str();
    bj->add_option("--w1", j_w1, "homo: weight; uniform: low; normal: mean")->capture_default_str();
    bj->add_option("--w2", j_w2, "uniform: high; normal: sigma")->capture_default_str();
    bj->add_option("--reps", jo.reps, "Timed repetitions (>= 5)")->capture_default_str();
    bj->add_option("--dense-guard-mb", j_dense_mb, "Skip dense above this size")->capture_default_str();
    bj->add_option("--sparse-guard-mb", j_sparse_mb, "Skip sparse above this size")->capture_default_str();

    Common sc;
    double s_p = 0.05;
    std::size_t s_draws = 10'000'000, s_reps = 5;
    auto* bs = bench->add_subcommand("samplers", "Uniform-gap vs geometric-inversion gap draws");
    add_common(bs, sc, "Write results as CSV");
    bs->add_option("--p", s_p, "Connection probability (0 < p < 1)")->capture_default_str();
    bs->add_option("--draws", s_draws, "Draws per repetition")->capture_default_str();
    bs->add_option("--reps", s_reps, "Timed repetitions (>= 5)")->capture_default_str();

    // sim
    auto* sim = app.add_subcommand("sim", "Run a network simulation")->require_subcommand(1);
    struct SimOut {
        std::string traces;
        std::string manifest;
    };
    Common ec;
    SimOut eo;
    double e_scale = 1, e_duration = 100, e_dt = 0.1;
    std::string e_comm = "jitconn";
    auto* se = sim->add_subcommand("ei-net", "COBA LIF excitatory/inhibitory network");
    add_common(se, ec, "Write the spike raster (step<TAB>neuron_id)");
    se->add_option("--scale", e_scale, "Network scale (4000 * scale neurons)")->capture_default_str();
    se->add_option("--duration-ms", e_duration, "Simulated time in ms")->capture_default_str();
    se->add_option("--dt", e_dt, "Time step in ms")->capture_default_str();
    se->add_option("--comm", e_comm, "Connectivity storage")
        ->check(CLI::IsMember({"jitconn", "sparse", "dense"}))
        ->capture_default_str();
    se->add_option("--traces", eo.traces, "Write monitor traces as CSV");
    se->add_option("--manifest", eo.manifest, "Write the run manifest (JSON)");

    Common cc;
    SimOut co;
    std::string c_file;
    auto* scfg = sim->add_subcommand("config", "Network described by a config file");
    add_common(scfg, cc, "Write the spike raster (step<TAB>neuron_id)");
    scfg->add_option("file", c_file, "Config file (JSON)")->required()->check(CLI::ExistingFile);
    scfg->add_option("--traces", co.traces, "Write monitor traces as CSV");
    scfg->add_option("--manifest", co.manifest, "Write the run manifest (JSON)");

    // train
    auto* train = app.add_subcommand("train", "Train a readout")->require_subcommand(1);
    Common rc;
    ReservoirParams rp;
    TrainOptions ro;
    std::string r_task = "sine", r_method = "force";
    auto* tr = train->add_subcommand("reservoir", "Echo-state reservoir with JIT weights");
    add_common(tr, rc, "Write per-step errors as CSV (step,error)");
    tr->add_option("--task", r_task, "Task")->check(CLI::IsMember({"sine", "memory"}))->capture_default_str();
    tr->add_option("--method", r_method, "Readout training")
        ->check(CLI::IsMember({"force", "ridge"}))
        ->capture_default_str();
    tr->add_option("--n-res", rp.n_res, "Reservoir units")->capture_default_str();
    tr->add_option("--rho", rp.rho, "Spectral radius target")->capture_default_str();
    tr->add_option("--alpha", rp.alpha, "Leak rate in (0, 1]")->capture_default_str();
    tr->add_option("--input-scale", rp.input_scale, "Input weight scale s")->capture_default_str();
    tr->add_option("--p-in", rp.p_in, "Input connection probability")->capture_default_str();
    tr->add_option("--p-rec", rp.p_rec, "Recurrent connection probability")->capture_default_str();
    tr->add_option("--train-steps", ro.train_steps, "Training steps")->capture_default_str();
    tr->add_option("--washout", ro.washout, "Initial steps excluded from training")->capture_default_str();
    tr->add_option("--test-steps", ro.test_steps, "Test window")->capture_default_str();
    tr->add_option("--lambda", ro.ridge_lambda, "Ridge regularization")->capture_default_str();
    tr->add_option("--delta", ro.force_delta, "FORCE P0 = I / delta")->capture_default_str();
    tr->add_flag("--closed-loop", ro.closed_loop, "Sine task: also report free-running generation");

    // diff
    std::string d_a, d_b;
    double d_tol = 1e-10;
    auto* diff = app.add_subcommand("diff", "Compare two benchmark CSV files");
    diff->add_option("a", d_a, "Baseline CSV")->required()->check(CLI::ExistingFile);
    diff->add_option("b", d_b, "Candidate CSV")->required()->check(CLI::ExistingFile);
    diff->add_option("--tol", d_tol, "Relative checksum tolerance")->capture_default_str();

    std::vector<std::string> argv_store{"spikekern"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitValidation;
    }

    try {
        if (*bk) {
            ko.seed = resolve_seed(kc.seed, ko.seed);
            ko.threads = kc.threads;
            ko.dense_guard_bytes = k_guard_mb << 20;
            emit_bench(out, bench_event_kernels(ko), kc.out, kc.json);
        } else if (*bj) {
            jo.seed = resolve_seed(jc.seed, jo.seed);
            jo.threads = jc.threads;
            jo.dense_guard_bytes = j_dense_mb << 20;
            jo.sparse_guard_bytes = j_sparse_mb << 20;
            if (j_dist == "homo") jo.dist = HomoDist{static_cast<Real>(j_w1)};
            else if (j_dist == "uniform") jo.dist = UniformDist{static_cast<Real>(j_w1), static_cast<Real>(j_w2)};
            else jo.dist = NormalDist{static_cast<Real>(j_w1), static_cast<Real>(j_w2)};
            jo.shapes.clear();
            for (const auto& sh : j_shapes) jo.shapes.push_back(parse_shape(sh));
            if (bj->count("--events-hz")) jo.events_hz = j_events_hz;
            emit_bench(out, bench_jitconn(jo), jc.out, jc.json);
        } else if (*bs) {
            const auto b = bench_gap_samplers(s_p, s_draws, s_reps, resolve_seed(sc.seed, 42));
            emit_bench(out, {b.uniform, b.geometric}, sc.out, sc.json);
            if (!b.means_within(0.01)) throw CheckFailure("sampler mean gaps deviate from analytic means by > 1%");
            if (s_p <= 0.1 && !b.uniform_faster())
                throw CheckFailure("uniform-gap sampler was not faster than geometric inversion");
        } else if (*se || *scfg) {
            const bool ei = se->parsed();
            const Common& c = ei ? ec : cc;
            const SimOut& so = ei ? eo : co;
            NetworkConfig cfg;
            if (ei) {
                const CommKind kind = e_comm == "jitconn" ? CommKind::JitConn
                                      : e_comm == "sparse" ? CommKind::Sparse
                                                           : CommKind::Dense;
                cfg = build_ei_net(e_scale, kind, resolve_seed(c.seed, 0), e_duration, e_dt);
            } else {
                cfg = load_network_config(c_file);
                if (c.seed || std::getenv("SPIKEKERN_SEED")) cfg.seed = resolve_seed(c.seed, cfg.seed);
            }
            if (c.threads > 1) cfg.threads = c.threads;
            Network net(cfg);
            const SimulationResult r = net.run();
            if (!c.out.empty()) {
                auto os = open_out(c.out);
                r.write_raster(os);
            }
            if (!so.traces.empty()) {
                auto os = open_out(so.traces);
                r.write_traces(os);
            }
            if (!so.manifest.empty()) {
                auto os = open_out(so.manifest);
                os << r.manifest.dump(2) << '\n';
            }
            const json summary = sim_summary(r, net);
            if (c.json) {
                out << summary.dump(2) << '\n';
            } else {
                out << "steps " << r.steps << " (dt " << r.dt << " ms), " << r.raster.size() << " raster events\n";
                for (const auto& p : summary["populations"])
                    out << "  " << p["id"].get<std::string>() << ": " << p["spikes"] << " spikes, "
                        << p["mean_rate_hz"].get<double>() << " Hz\n";
                out << "state bytes " << r.bytes.total() << ", wall " << r.timing.total() << " s\n";
            }
        } else if (*tr) {
            rp.seed = resolve_seed(rc.seed, 0);
            ro.task = r_task == "sine" ? ReservoirTask::Sine : ReservoirTask::Memory;
            ro.method = r_method == "force" ? ReadoutMethod::Force : ReadoutMethod::Ridge;
            const TrainResult r = train_reservoir(rp, ro, Exec{rc.threads});
            if (!rc.out.empty()) {
                auto os = open_out(rc.out);
                os << "step,error\n";
                std::size_t step = ro.washout;
                os.precision(17);
                for (double e : r.train_error) os << step++ << ',' << e << '\n';
                for (double e : r.test_error) os << step++ << ',' << e << '\n';
            }
            json summary{{"task", r_task},
                         {"method", r_method},
                         {"n_res", rp.n_res},
                         {"rho", rp.rho},
                         {"alpha", rp.alpha},
                         {"p_rec", rp.p_rec},
                         {"seed", rp.seed},
                         {"train_steps", ro.train_steps},
                         {"test_steps", ro.test_steps},
                         {"nrmse", r.nrmse}};
            if (ro.closed_loop) summary["closed_loop_nrmse"] = r.closed_loop_nrmse;
            out << summary.dump(rc.json ? 2 : -1) << '\n';
        } else if (*diff) {
            std::ifstream fa(d_a), fb(d_b);
            const CsvDiff d = diff_bench_csv(read_csv(fa), read_csv(fb), d_tol);
            if (!d.schema_equal) {
                out << "schema differs\n";
                return kExitCheckFailed;
            }
            for (const auto& k : d.missing) out << "only in " << d_a << ": " << k << '\n';
            for (const auto& k : d.added) out << "only in " << d_b << ": " << k << '\n';
            for (const auto& k : d.checksum_diffs) out << "checksum differs: " << k << '\n';
            for (const auto& [k, ratio] : d.speed_ratio) out << "median ratio " << ratio << "  " << k << '\n';
            out << (d.equivalent() ? "equivalent\n" : "not equivalent\n");
            return d.equivalent() ? kExitOk : kExitCheckFailed;
        }
    } catch (const CheckFailure& e) {
        err << "check failed: " << e.what() << '\n';
        return kExitCheckFailed;
    } catch (const ValidationError& e) {
        err << "invalid input: " << e.what() << '\n';
        return kExitValidation;
    } catch (const DimensionError& e) {
        err << "invalid input: " << e.what() << '\n';
        return kExitValidation;
    } catch (const MergeContractError& e) {
        err << "invalid input: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitOk;
}

}  // namespace spikekern
