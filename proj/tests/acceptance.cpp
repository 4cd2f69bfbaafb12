// Acceptance runner: one PASS/FAIL line per criterion.
//
//   spikekern_acceptance            run everything
//   spikekern_acceptance --only 7   run one criterion
//
// Exit status is 0 only if every selected criterion passed.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

#include "gen.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"
#include "spikekern/bench.hpp"
#include "spikekern/dynamics.hpp"
#include "spikekern/log.hpp"
#include "spikekern/network.hpp"
#include "spikekern/reservoir.hpp"

using namespace spikekern;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    std::vector<std::string> failed;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            failed.push_back(what);
        }
    }
};

struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<void(Outcome&)> body;
};

std::vector<double> to_d(const std::vector<Real>& v) { return {v.begin(), v.end()}; }

/// Largest |a - b| / max(|b|, scale) over all entries.
double rel_err(const std::vector<Real>& a, const std::vector<double>& b, const std::vector<double>& scale)
{
    double worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double s = std::max(std::abs(b[i]), scale[i]);
        const double d = std::abs(a[i] - b[i]);
        if (d > 0) worst = std::max(worst, s > 0 ? d / s : INFINITY);
    }
    return worst;
}

void kernel_equivalence(Outcome& o)
{
    gen::Rng rng(0xC1);
    const double dens[] = {0.001, 0.01, 0.1};
    std::size_t exact_fail = 0;
    double worst = 0;
    for (int it = 0; it < 500; ++it) {
        const bool homo = it % 2 == 0;
        const auto m = gen::csr(rng, 64, homo);
        const auto d = oracle::dense_of(m);
        for (bool t : {false, true}) {
            const auto ev = gen::spikes(rng, t ? m.n_rows() : m.n_cols(), dens[(it / 2) % 3]);
            const auto v = to_d(ev.as_real());
            const auto want = oracle::matvec(d, v, t);
            const auto y_event = event_csrmv(m, ev, t);
            const auto y_csr = csrmv(m, ev.as_real(), t);
            if (homo) {
                exact_fail += (to_d(y_event) != want) + (to_d(y_csr) != want);
            } else {
                const auto scale = oracle::abs_scale(d, v, t);
                worst = std::max({worst, rel_err(y_event, want, scale), rel_err(y_csr, want, scale),
                                  rel_err(y_event, to_d(y_csr), scale)});
            }
        }
    }
    o.detail << "500 instances x 2 orientations, homogeneous mismatches " << exact_fail << ", max rel err " << worst;
    o.require(exact_fail == 0, "homogeneous exact");
    o.require(worst <= 1e-12, "rel err <= 1e-12");
}

void jit_equivalence(Outcome& o)
{
    gen::Rng rng(0xC2);
    const double dens[] = {0.001, 0.01, 0.1};
    double worst = 0;
    std::size_t unstable = 0;
    for (int it = 0; it < 500; ++it) {
        const auto s = gen::jit_spec(rng, 512);
        const auto m = materialize(s);
        const auto d = oracle::dense_of(m);
        for (bool t : {false, true}) {
            const auto v = gen::reals(rng, t ? s.n_rows : s.n_cols);
            const std::vector<Real> vr(v.begin(), v.end());
            const auto y = jitconn_matvec(s, vr, t);
            worst = std::max(worst, rel_err(y, to_d(csrmv(m, vr, t)), oracle::abs_scale(d, v, t)));
            unstable += y != jitconn_matvec(s, vr, t);

            const auto ev = gen::spikes(rng, t ? s.n_rows : s.n_cols, dens[it % 3]);
            const auto ye = jitconn_event_matvec(s, ev, t);
            worst = std::max(worst, rel_err(ye, to_d(csrmv(m, ev.as_real(), t)),
                                            oracle::abs_scale(d, to_d(ev.as_real()), t)));
            unstable += ye != jitconn_event_matvec(s, ev, t);
        }
    }
    o.detail << "500 specs, max rel err " << worst << ", non-repeatable outputs " << unstable;
    o.require(worst <= 1e-12, "rel err <= 1e-12");
    o.require(unstable == 0, "bit-identical repeats");
}

void effective_connectivity(Outcome& o)
{
    for (double p : {0.01, 0.05, 0.1}) {
        const auto s = make_jitconn_spec(2000, 2000, p, HomoDist{1}, derive_seed(3, "acceptance.density"));
        const double pe = 2.0 / (std::floor(2.0 / p - 1.0 + 1e-9) + 1.0);
        const double n = 2000.0 * 2000.0;
        const double z = (materialize(s).nnz() - n * pe) / std::sqrt(n * pe * (1 - pe));
        o.detail << "p=" << p << " z=" << z << "; ";
        o.require(std::abs(z) <= 4, "density within 4 sigma at p=" + std::to_string(p));
    }
}

void event_rate_monotonicity(Outcome& o)
{
    EventBenchOptions b;
    b.n = 50'000;
    b.p = 0.01;
    b.dt = 0.1;
    b.rates_hz = {1000, 100, 10};  // event densities 10%, 1%, 0.1%
    b.reps = 10;
    const auto rows = bench_event_kernels(b);
    std::vector<double> event;
    double dense_at_low = 0;
    for (const auto& r : rows) {
        if (r.kernel == "event_csrmv") event.push_back(r.timing.median_ns);
        if (r.kernel == "dense_matvec" && r.rate_hz == 10) dense_at_low = r.timing.median_ns;
    }
    o.detail << "event_csrmv median us at 10%/1%/0.1%: " << event[0] / 1e3 << " / " << event[1] / 1e3 << " / "
             << event[2] / 1e3 << ", dense/event at 0.1% = " << dense_at_low / event[2];
    o.require(event[0] > event[1] && event[1] > event[2], "strictly decreasing");
    o.require(dense_at_low >= 10 * event[2], ">= 10x faster than dense");
}

void jit_memory(Outcome& o)
{
    std::vector<std::size_t> jit, sparse;
    for (Index n : {Index{1000}, Index{10'000}, Index{100'000}}) {
        const auto s = make_jitconn_spec(n, n, 0.01, HomoDist{1}, 1);
        jit.push_back(comm_state_bytes(Comm{s}));
        sparse.push_back(csr_state_bytes(n, static_cast<std::size_t>(expected_nnz(s)), true));
    }
    const double growth = double(sparse.back()) / double(sparse.front());
    o.detail << "jitconn bytes " << jit[0] << "/" << jit[1] << "/" << jit[2] << ", sparse growth x" << growth;
    o.require(jit[0] == jit[1] && jit[1] == jit[2], "jit bytes identical");
    o.require(growth >= 100, "sparse grows >= 100x");
}

void gap_samplers(Outcome& o)
{
    for (double p : {0.01, 0.05, 0.1}) {
        const auto s = bench_gap_samplers(p, 10'000'000, 5, 42);
        o.detail << "p=" << p << " uniform " << s.uniform.timing.median_ns / 1e6 << " ms vs geometric "
                 << s.geometric.timing.median_ns / 1e6 << " ms, means " << s.uniform_mean << "/" << s.geometric_mean
                 << "; ";
        o.require(s.uniform_faster(), "uniform faster at p=" + std::to_string(p));
        o.require(s.means_within(0.01), "means within 1% at p=" + std::to_string(p));
    }
}

void reduction_equivalence(Outcome& o)
{
    const auto r = scenario::run_reduction(0xC7, 1000, 0.1);
    o.detail << "max abs diff " << r.max_abs_diff << ", groups post/pre " << r.post_groups << "/" << r.pre_groups
             << ", scalars reduced " << r.reduced_scalars << " vs per-synapse " << r.oracle_scalars;
    o.require(r.max_abs_diff <= 1e-10, "diff <= 1e-10");
    o.require(r.scalar_counts_ok, "scalar counts m / n per group");
}

void merging_economy(Outcome& o)
{
    const auto r = scenario::run_merge(5, 0xC8, 200);
    o.detail << "scalars merged " << r.merged_scalars << " vs unmerged " << r.unmerged_scalars << " (n=" << r.post_size
             << "), spikes " << r.spikes << ", max V diff " << r.max_v_diff;
    o.require(r.merged_scalars == r.post_size, "merged = n");
    o.require(r.unmerged_scalars == 5 * r.post_size, "unmerged = 5n");
    o.require(r.rasters_equal && r.max_v_diff <= 1e-10, "outputs identical");
}

double r_squared(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = x.size();
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return syy == 0 ? 1.0 : sxy * sxy / (sxx * syy);
}

void ei_net_scaling(Outcome& o)
{
    const auto base = build_ei_net(1.0, CommKind::JitConn, 7, 100);
    const auto first = simulate(base).raster;
    int identical = 1;
    for (int k = 1; k < 5; ++k) identical += simulate(base).raster == first;
    o.detail << "identical rasters " << identical << "/5 (" << first.size() << " events); ";
    o.require(identical == 5, "bit-identical rasters");

    std::vector<double> scales{1, 2, 4, 8}, times, bytes;
    for (double s : scales) {
        const auto cfg = build_ei_net(s, CommKind::JitConn, 7, 500);
        std::vector<double> t;
        for (int rep = 0; rep < 3; ++rep) {
            const auto t0 = std::chrono::steady_clock::now();
            simulate(cfg);
            t.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        }
        std::sort(t.begin(), t.end());
        times.push_back(t[1]);
        bytes.push_back(double(state_byte_count(cfg).total()));
    }
    const double r2_t = r_squared(scales, times);
    const double r2_b = r_squared(scales, bytes);
    const double super_t = (times.back() / scales.back()) / (times.front() / scales.front());
    const double super_b = (bytes.back() / scales.back()) / (bytes.front() / scales.front());
    o.detail << "runtime s " << times[0] << "/" << times[1] << "/" << times[2] << "/" << times[3] << " R2 " << r2_t
             << " superlinearity " << super_t << "; bytes R2 " << r2_b << " superlinearity " << super_b;
    o.require(r2_t >= 0.95 && r2_b >= 0.95, "R2 >= 0.95");
    o.require(super_t <= 1.3 && super_b <= 1.3, "superlinearity <= 1.3");
}

std::vector<double> gif_times(const oracle::GifCase& c, double dt, double t_end)
{
    GifParams p;
    p.a1 = c.a1;
    p.a2 = c.a2;
    p.tau_v = c.tau_v;
    p.tau_i1 = c.tau_i1;
    p.tau_i2 = {c.tau_i2};
    p.v_rest = c.v_rest;
    p.v_th = c.v_th;
    p.r = c.r;
    GifState s(1, c.v_rest);
    const std::vector<Real> in{c.drive};
    std::vector<double> out;
    const long steps = std::lround(t_end / dt);
    for (long k = 1; k <= steps; ++k)
        if (gif_step(s, p, in, dt)[0]) out.push_back(k * dt);
    return out;
}

void neuron_correctness(Outcome& o)
{
    LifParams lp;
    const double dt_lif = 0.01;
    double worst_lif = 0;
    for (double ri : {10.5, 15.0, 30.0}) {
        LifState s(1, lp.v_rest);
        const std::vector<Real> in{static_cast<Real>(ri)};
        double t = -1;
        for (long k = 0; t < 0 && k < 100000; ++k)
            if (lif_step(s, lp, in, k * dt_lif, dt_lif)[0]) t = (k + 1) * dt_lif;
        worst_lif = std::max(worst_lif, std::abs(t - oracle::lif_first_passage(lp.tau, lp.v_rest, lp.v_th, ri)));
    }
    o.detail << "LIF first-spike error " << worst_lif << " ms; ";
    o.require(worst_lif <= dt_lif, "LIF within one dt");

    const double dt = 0.1, t_end = 200;
    struct Case {
        const char* name;
        oracle::GifCase c;
    };
    for (const auto& [name, c] : {Case{"burst", {8, -0.6, 0.1}}, Case{"adapt", {0, -0.6, 2.0}}}) {
        const auto coarse = gif_times(c, dt, t_end);
        const auto fine = oracle::gif_spike_times(c, dt / 10, t_end);
        double drift = 0;
        for (std::size_t k = 0; k < std::min(coarse.size(), fine.size()); ++k)
            drift = std::max(drift, std::abs(coarse[k] - fine[k]));
        bool pattern = coarse.size() >= 2;
        if (c.a1 > 0) {
            bool burst = false;
            for (std::size_t k = 1; k < coarse.size(); ++k) burst |= coarse[k] - coarse[k - 1] < 3 * dt * c.tau_v;
            pattern = pattern && burst;
        } else {
            for (std::size_t k = 2; k < coarse.size(); ++k)
                pattern = pattern && coarse[k] - coarse[k - 1] > coarse[k - 1] - coarse[k - 2];
        }
        o.detail << "GIF " << name << ": " << coarse.size() << " vs " << fine.size() << " spikes, max drift " << drift
                 << " ms (" << drift / dt << " dt); ";
        o.require(pattern, std::string("GIF ") + name + " firing pattern");
        o.require(coarse.size() == fine.size(), std::string("GIF ") + name + " spike count matches reference");
        o.require(drift <= dt, std::string("GIF ") + name + " drift within one coarse dt");
    }
}

void reservoir_force(Outcome& o)
{
    struct Col {
        Real rho, alpha, s;
    };
    for (const auto& col : {Col{1.0, 0.9, 0.1}, Col{1.3, 0.6, 0.3}}) {
        ReservoirParams p;
        p.n_res = 400;
        p.rho = col.rho;
        p.alpha = col.alpha;
        p.input_scale = col.s;
        p.seed = derive_seed(11, "acceptance.reservoir");
        TrainOptions t;
        t.method = ReadoutMethod::Force;
        t.test_steps = 1000;
        const auto r = train_reservoir(p, t);
        const double gap = (r.w_out - ridge_fit(r.states, r.targets, t.force_delta)).cwiseAbs().maxCoeff();
        o.detail << "rho=" << col.rho << " alpha=" << col.alpha << ": NRMSE " << r.nrmse << ", |W_force - W_ridge| "
                 << gap << "; ";
        o.require(r.nrmse < 0.1, "NRMSE < 0.1");
        o.require(gap <= 1e-3, "FORCE matches ridge");
    }
}

void surrogate(Outcome& o)
{
    const Real alpha = 0.3, width = 1.0;
    double worst = 0;
    std::size_t outside_nonzero = 0;
    for (int i = 0; i < 10'000; ++i) {
        const double x = -2.0 + 4.0 * i / 9999.0;
        const double want = std::max(0.0, alpha * (width - std::abs(x)));
        const double got = surrogate_relu_grad(static_cast<Real>(x), alpha, width);
        worst = std::max(worst, std::abs(got - want));
        if (std::abs(x) >= width && got != 0) ++outside_nonzero;
    }
    const double at0 = surrogate_relu_grad(0, alpha, width);
    o.detail << "max abs err " << worst << ", nonzero outside " << outside_nonzero << ", value at 0 " << at0;
    o.require(worst <= 1e-15, "analytic match");
    o.require(outside_nonzero == 0, "zero outside (-width, width)");
    o.require(std::abs(at0 - 0.3) <= 1e-15, "0.3 at x = 0");
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance criteria"};
    int only = 0;
    app.add_option("--only", only, "Run a single criterion (1-12)")->check(CLI::Range(1, 12));
    CLI11_PARSE(app, argc, argv);
    set_quiet_warnings(true);

    const std::vector<Criterion> criteria{
        {1, "kernel equivalence", 10, kernel_equivalence},
        {2, "JIT materialization equivalence", 30, jit_equivalence},
        {3, "effective connectivity", 10, effective_connectivity},
        {4, "event-rate monotonicity", 120, event_rate_monotonicity},
        {5, "JIT memory constancy", 1, jit_memory},
        {6, "gap-sampler speed", 30, gap_samplers},
        {7, "AlignPost/AlignPre reduction equivalence", 60, reduction_equivalence},
        {8, "merging economy", 30, merging_economy},
        {9, "EI-net reproducibility and scaling", 300, ei_net_scaling},
        {10, "LIF/GIF correctness", 30, neuron_correctness},
        {11, "reservoir FORCE", 120, reservoir_force},
        {12, "surrogate gradient", 1, surrogate},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        if (only && c.id != only) continue;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.body(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.require(secs < c.limit_s, "runtime < " + std::to_string(c.limit_s) + " s");
        failed += o.pass ? 0 : 1;
        std::string detail = o.detail.str();
        while (!detail.empty() && (detail.back() == ' ' || detail.back() == ';')) detail.pop_back();
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << detail << " ("
                  << secs << " s)";
        for (std::size_t k = 0; k < o.failed.size(); ++k) std::cout << (k ? "; " : " | unmet: ") << o.failed[k];
        std::cout << '\n' << std::flush;
    }
    return failed == 0 ? 0 : 1;
}
