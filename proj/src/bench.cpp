#include "spikekern/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "spikekern/counter_rng.hpp"
#include "spikekern/dense.hpp"
#include "spikekern/sparse_kernels.hpp"

namespace spikekern {

using nlohmann::json;

TimingStats summarize_ns(std::vector<double> samples)
{
    TimingStats t;
    t.reps = samples.size();
    if (samples.empty()) return t;
    std::sort(samples.begin(), samples.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(samples.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, samples.size() - 1);
        return samples[lo] + (samples[hi] - samples[lo]) * (pos - static_cast<double>(lo));
    };
    t.median_ns = quantile(0.5);
    t.p10_ns = quantile(0.1);
    t.p90_ns = quantile(0.9);
    t.mean_ns = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
    return t;
}

TimingStats time_reps(const std::function<void()>& fn, std::size_t reps, std::size_t warmup)
{
    if (reps == 0) throw ValidationError("reps must be positive");
    for (std::size_t i = 0; i < warmup; ++i) fn();
    std::vector<double> samples;
    samples.reserve(reps);
    for (std::size_t i = 0; i < reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        samples.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
    }
    return summarize_ns(std::move(samples));
}

const std::vector<std::string>& bench_csv_header()
{
    static const std::vector<std::string> header{"bench",   "case",    "kernel",      "rows",     "cols",
                                                 "density", "rate_hz", "reps",        "median_ns", "mean_ns",
                                                 "p10_ns",  "p90_ns",  "loop_ms",     "state_bytes", "checksum",
                                                 "skipped", "note"};
    return header;
}

namespace {

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::string num(double x)
{
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

void write_bench_csv(std::ostream& os, const std::vector<BenchResult>& results)
{
    const auto& header = bench_csv_header();
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& r : results) {
        const bool t = !r.skipped;
        os << csv_field(r.bench) << ',' << csv_field(r.case_id) << ',' << csv_field(r.kernel) << ',' << r.rows << ','
           << r.cols << ',' << num(r.density) << ',' << num(r.rate_hz) << ',' << (t ? r.timing.reps : 0) << ','
           << (t ? num(r.timing.median_ns) : "") << ',' << (t ? num(r.timing.mean_ns) : "") << ','
           << (t ? num(r.timing.p10_ns) : "") << ',' << (t ? num(r.timing.p90_ns) : "") << ','
           << (t ? num(r.loop_ms) : "") << ',' << r.state_bytes << ',' << (t ? num(r.checksum) : "") << ','
           << (r.skipped ? 1 : 0) << ',' << csv_field(r.note) << '\n';
    }
}

json bench_results_json(const std::vector<BenchResult>& results)
{
    json arr = json::array();
    for (const auto& r : results) {
        json j{{"bench", r.bench},   {"case", r.case_id},         {"kernel", r.kernel},
               {"rows", r.rows},     {"cols", r.cols},            {"density", r.density},
               {"rate_hz", r.rate_hz}, {"state_bytes", r.state_bytes}, {"skipped", r.skipped},
               {"note", r.note}};
        if (!r.skipped) {
            j["reps"] = r.timing.reps;
            j["median_ns"] = r.timing.median_ns;
            j["mean_ns"] = r.timing.mean_ns;
            j["p10_ns"] = r.timing.p10_ns;
            j["p90_ns"] = r.timing.p90_ns;
            j["loop_ms"] = r.loop_ms;
            j["checksum"] = r.checksum;
        }
        arr.push_back(j);
    }
    return arr;
}

namespace {

double sum_prefix(std::span<const Real> v, std::size_t n)
{
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
}

/// Throws CheckFailure unless got[0, n) equals want[0, n) within tol (relative to scale).
void check_equal(std::span<const Real> got, std::span<const Real> want, std::size_t n, double tol, double scale,
                 const std::string& what)
{
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::abs(static_cast<double>(got[i]) - static_cast<double>(want[i]));
        if (d > tol * std::max(1.0, scale)) {
            throw CheckFailure(what + ": output " + std::to_string(i) + " differs (" + num(got[i]) + " vs " +
                               num(want[i]) + "); times not reported");
        }
    }
}

std::string fmt_case(const std::vector<std::pair<std::string, double>>& kv)
{
    std::ostringstream os;
    os.precision(12);
    for (std::size_t i = 0; i < kv.size(); ++i) os << (i ? ";" : "") << kv[i].first << '=' << kv[i].second;
    return os.str();
}

}  // namespace

std::vector<BenchResult> bench_event_kernels(const EventBenchOptions& o)
{
    if (o.n == 0 || o.reps < 5) throw ValidationError("bench kernels needs n > 0 and reps >= 5");
    if (!(o.dt > 0)) throw ValidationError("dt must be > 0");
    for (double r : o.rates_hz)
        if (!(r >= 0) || r * o.dt / 1000.0 > 1.0) throw ValidationError("rate out of range for dt");
    const Exec exec{o.threads};
    const double tol = o.threads > 1 ? 1e-10 : 0.0;
    const auto n = static_cast<Index>(o.n);

    const CsrMatrix m = materialize(make_jitconn_spec(n, n, o.p, HomoDist{1}, derive_seed(o.seed, "bench.matrix")));
    const double max_in_degree = static_cast<double>(m.nnz()) / static_cast<double>(n) * 4 + 16;

    // Dense baseline: a block of rows of M^T, i.e. the first `block` outputs.
    const std::size_t full_bytes = o.n * o.n * sizeof(Real);
    const std::size_t block = std::clamp<std::size_t>(o.dense_guard_bytes / (o.n * sizeof(Real)), 0, o.n);
    DenseMatrix dense_block(block, o.n);
    {
        const auto indptr = m.indptr();
        const auto indices = m.indices();
        for (Index i = 0; i < n; ++i) {
            for (Index j = indptr[i]; j < indptr[i + 1] && indices[j] < block; ++j)
                dense_block(indices[j], i) = m.homogeneous_weight();
        }
    }
    const double dense_scale = block ? static_cast<double>(o.n) / static_cast<double>(block) : 0;

    std::vector<BenchResult> results;
    std::vector<Real> y_dense(block), y_csr(o.n), y_event(o.n);
    for (std::size_t ri = 0; ri < o.rates_hz.size(); ++ri) {
        const double rate = o.rates_hz[ri];
        const double q = rate * o.dt / 1000.0;
        SpikeVector events(o.n);
        RowSampler rng(derive_seed(o.seed, "bench.events"), ri);
        for (std::size_t i = 0; i < o.n; ++i)
            if (rng.uniform01() < q) events.set(i);
        const std::vector<Real> v = events.as_real();

        event_csrmv_into(m, events, true, y_event, exec);
        csrmv_into(m, v, true, y_csr, exec);
        check_equal(y_csr, y_event, o.n, tol, max_in_degree, "csrmv vs event_csrmv");
        if (block) {
            dense_matvec_into(dense_block, v, false, y_dense);
            check_equal(y_dense, y_event, block, tol, max_in_degree, "dense_matvec vs event_csrmv");
        }
        const std::size_t compared = block ? block : o.n;
        const double checksum = sum_prefix(y_event, compared);

        auto base = [&](const char* kernel) {
            BenchResult r;
            r.bench = "kernels";
            r.case_id = fmt_case({{"n", double(o.n)}, {"p", o.p}, {"rate_hz", rate}});
            r.kernel = kernel;
            r.rows = r.cols = o.n;
            r.density = q;
            r.rate_hz = rate;
            return r;
        };
        const double steps_per_second = 1000.0 / o.dt;

        BenchResult rd = base("dense_matvec");
        rd.state_bytes = full_bytes;
        if (block) {
            rd.timing = time_reps([&] { dense_matvec_into(dense_block, v, false, y_dense); }, o.reps, o.warmup);
            if (block < o.n) {
                for (double* x : {&rd.timing.median_ns, &rd.timing.mean_ns, &rd.timing.p10_ns, &rd.timing.p90_ns})
                    *x *= dense_scale;
                rd.note = "dense time measured on " + std::to_string(block) + " of " + std::to_string(o.n) +
                          " output rows and scaled linearly; checksum over the first " + std::to_string(block) +
                          " outputs";
            }
            rd.checksum = sum_prefix(y_dense, compared);
            rd.loop_ms = rd.timing.median_ns * steps_per_second / 1e6;
        } else {
            rd.skipped = true;
            rd.note = "dense baseline skipped: one row exceeds the dense size guard";
        }

        BenchResult rc = base("csrmv");
        rc.state_bytes = m.state_bytes();
        rc.timing = time_reps([&] { csrmv_into(m, v, true, y_csr, exec); }, o.reps, o.warmup);
        rc.checksum = sum_prefix(y_csr, compared);
        rc.loop_ms = rc.timing.median_ns * steps_per_second / 1e6;

        BenchResult re = base("event_csrmv");
        re.state_bytes = m.state_bytes();
        re.timing = time_reps([&] { event_csrmv_into(m, events, true, y_event, exec); }, o.reps, o.warmup);
        re.checksum = checksum;
        re.loop_ms = re.timing.median_ns * steps_per_second / 1e6;
        re.note = "active=" + std::to_string(events.count());

        results.push_back(std::move(rd));
        results.push_back(std::move(rc));
        results.push_back(std::move(re));
    }
    return results;
}

std::vector<BenchResult> bench_jitconn(const JitBenchOptions& o)
{
    if (o.reps < 5) throw ValidationError("bench jitconn needs reps >= 5");
    const bool event_mode = o.events_hz.has_value();
    if (event_mode && (!(*o.events_hz >= 0) || *o.events_hz * o.dt / 1000.0 > 1.0))
        throw ValidationError("events_hz out of range for dt");
    const Exec exec{o.threads};
    const bool homo = std::holds_alternative<HomoDist>(o.dist);
    std::vector<BenchResult> results;
    for (std::size_t si = 0; si < o.shapes.size(); ++si) {
        const auto [rows, cols] = o.shapes[si];
        if (rows == 0 || cols == 0) throw ValidationError("bench jitconn shapes must be positive");
        const JitConnSpec spec = make_jitconn_spec(static_cast<Index>(rows), static_cast<Index>(cols), o.p, o.dist,
                                                   derive_seed(o.seed, "bench.jit"));

        // Event mode scatters presynaptic spikes (rows) into cols outputs;
        // otherwise y = J v gathers a real vector over cols into rows outputs.
        const std::size_t in_len = event_mode ? rows : cols;
        const std::size_t out_len = event_mode ? cols : rows;
        std::vector<Real> v(in_len);
        SpikeVector events(event_mode ? rows : 0);
        RowSampler rng(derive_seed(o.seed, "bench.jit.input"), si);
        if (event_mode) {
            const double q = *o.events_hz * o.dt / 1000.0;
            for (std::size_t i = 0; i < rows; ++i)
                if (rng.uniform01() < q) events.set(i);
            v = events.as_real();
        } else {
            for (auto& x : v) x = static_cast<Real>(rng.uniform(-1, 1));
        }

        std::vector<Real> y_jit(out_len), y_other(out_len);
        auto run_jit = [&] {
            if (event_mode) jitconn_event_matvec_into(spec, events, true, y_jit, exec);
            else jitconn_matvec_into(spec, v, false, y_jit, exec);
        };
        run_jit();
        double max_w = 0;
        std::visit(
            [&](const auto& d) {
                using D = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<D, HomoDist>) max_w = std::abs(d.w);
                else if constexpr (std::is_same_v<D, UniformDist>) max_w = std::max(std::abs(d.w_low), std::abs(d.w_high));
                else max_w = std::abs(d.w_mu) + 8 * d.w_sigma;
            },
            o.dist);
        const double scale = max_w * (static_cast<double>(in_len) * spec.effective_prob() + 1);
        const double tol = o.threads > 1 ? 1e-10 : 1e-12;

        auto base = [&](const char* kernel) {
            BenchResult r;
            r.bench = "jitconn";
            std::vector<std::pair<std::string, double>> kv{{"rows", double(rows)}, {"cols", double(cols)}, {"p", o.p}};
            if (event_mode) kv.emplace_back("events_hz", *o.events_hz);
            r.case_id = fmt_case(kv);
            r.kernel = kernel;
            r.rows = rows;
            r.cols = cols;
            r.density = spec.effective_prob();
            r.rate_hz = event_mode ? *o.events_hz : 0;
            return r;
        };

        BenchResult rd = base("dense_matvec");
        rd.state_bytes = rows * cols * sizeof(Real);
        if (rd.state_bytes > o.dense_guard_bytes) {
            rd.skipped = true;
            rd.note = "skipped: dense matrix exceeds the size guard";
        } else {
            const DenseMatrix d = materialize(spec).densify();
            dense_matvec_into(d, v, event_mode, y_other);
            check_equal(y_other, y_jit, out_len, tol, scale, "dense_matvec vs jitconn");
            rd.timing = time_reps([&] { dense_matvec_into(d, v, event_mode, y_other); }, o.reps, o.warmup);
            rd.checksum = sum_prefix(y_other, out_len);
        }

        BenchResult rs = base(event_mode ? "event_csrmv" : "csrmv");
        const auto expected = static_cast<std::size_t>(std::llround(expected_nnz(spec)));
        rs.state_bytes = csr_state_bytes(rows, expected, homo);
        if (rs.state_bytes > o.sparse_guard_bytes) {
            rs.skipped = true;
            rs.note = "skipped: materialized CSR exceeds the size guard; state bytes from expected nnz";
        } else {
            const CsrMatrix m = materialize(spec);
            rs.state_bytes = m.state_bytes();
            auto run_sparse = [&] {
                if (event_mode) event_csrmv_into(m, events, true, y_other, exec);
                else csrmv_into(m, v, false, y_other, exec);
            };
            run_sparse();
            check_equal(y_other, y_jit, out_len, tol, scale, "sparse vs jitconn");
            rs.timing = time_reps(run_sparse, o.reps, o.warmup);
            rs.checksum = sum_prefix(y_other, out_len);
            rs.note = "nnz=" + std::to_string(m.nnz());
        }

        BenchResult rj = base(event_mode ? "jitconn_event_matvec" : "jitconn_matvec");
        rj.state_bytes = JitConnSpec::state_bytes();
        rj.timing = time_reps(run_jit, o.reps, o.warmup);
        rj.checksum = sum_prefix(y_jit, out_len);

        results.push_back(std::move(rd));
        results.push_back(std::move(rs));
        results.push_back(std::move(rj));
    }
    return results;
}

bool SamplerBench::means_within(double rel) const
{
    return std::abs(uniform_mean - uniform_expected) <= rel * uniform_expected &&
           std::abs(geometric_mean - geometric_expected) <= rel * geometric_expected;
}

SamplerBench bench_gap_samplers(double p, std::size_t draws, std::size_t reps, std::uint64_t seed)
{
    if (!(p > 0 && p < 1)) throw ValidationError("gap sampler bench needs 0 < p < 1");
    if (draws == 0 || reps < 5) throw ValidationError("gap sampler bench needs draws > 0 and reps >= 5");
    const std::uint64_t k = gap_bound(p);
    const std::uint64_t stream = derive_seed(seed, "bench.gaps");

    volatile std::uint64_t sink = 0;
    std::uint64_t uniform_sum = 0;
    std::uint64_t geometric_sum = 0;
    auto uniform = [&] {
        RowSampler s(stream, 0);
        std::uint64_t sum = 0;
        for (std::size_t i = 0; i < draws; ++i) sum += s.uniform_int(k);
        uniform_sum = sum;
        sink = sink + sum;
    };
    auto geometric = [&] {
        RowSampler s(stream, 1);
        std::uint64_t sum = 0;
        for (std::size_t i = 0; i < draws; ++i) sum += jitconn_geometric_gap(p, s.uniform01());
        geometric_sum = sum;
        sink = sink + sum;
    };

    SamplerBench b;
    for (BenchResult* r : {&b.uniform, &b.geometric}) {
        r->bench = "samplers";
        r->case_id = fmt_case({{"p", p}, {"draws", double(draws)}});
        r->rows = draws;
        r->density = p;
    }
    b.uniform.kernel = "uniform_gap";
    b.geometric.kernel = "geometric_inversion";
    b.uniform.timing = time_reps(uniform, reps, 1);
    b.geometric.timing = time_reps(geometric, reps, 1);

    const double nd = static_cast<double>(draws);
    b.uniform_mean = static_cast<double>(uniform_sum) / nd;
    b.geometric_mean = static_cast<double>(geometric_sum) / nd;
    b.uniform_expected = (static_cast<double>(k) + 1.0) / 2.0;
    b.geometric_expected = 1.0 / p;
    b.uniform.checksum = b.uniform_mean;
    b.geometric.checksum = b.geometric_mean;
    b.uniform.note = "mean gap; expected " + num(b.uniform_expected) + " (K=" + std::to_string(k) + ")";
    b.geometric.note = "mean gap; expected " + num(b.geometric_expected);
    return b;
}

CsvTable read_csv(std::istream& is)
{
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if (quoted) {
                if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else if (c == '"') {
                    quoted = false;
                } else {
                    cell += c;
                }
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                cells.push_back(std::move(cell));
                cell.clear();
            } else {
                cell += c;
            }
        }
        if (quoted) throw ValidationError("CSV: unterminated quote");
        cells.push_back(std::move(cell));
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != t.header.size())
                throw ValidationError("CSV: row with " + std::to_string(cells.size()) + " cells, header has " +
                                      std::to_string(t.header.size()));
            t.rows.push_back(std::move(cells));
        }
    }
    if (first) throw ValidationError("CSV: empty input");
    return t;
}

CsvDiff diff_bench_csv(const CsvTable& a, const CsvTable& b, double tol)
{
    CsvDiff d;
    d.schema_equal = a.header == b.header;
    if (!d.schema_equal) return d;
    auto col = [&](const char* name) -> std::size_t {
        const auto it = std::find(a.header.begin(), a.header.end(), name);
        if (it == a.header.end()) throw ValidationError(std::string("CSV: missing column '") + name + "'");
        return static_cast<std::size_t>(it - a.header.begin());
    };
    const std::size_t c_bench = col("bench"), c_case = col("case"), c_kernel = col("kernel");
    const std::size_t c_sum = col("checksum"), c_med = col("median_ns");

    auto index = [&](const CsvTable& t) {
        std::map<std::string, const std::vector<std::string>*> m;
        for (const auto& r : t.rows) m[r[c_bench] + "|" + r[c_case] + "|" + r[c_kernel]] = &r;
        return m;
    };
    const auto ia = index(a);
    const auto ib = index(b);
    for (const auto& [key, ra] : ia) {
        const auto it = ib.find(key);
        if (it == ib.end()) {
            d.missing.push_back(key);
            continue;
        }
        const auto& rb = *it->second;
        const std::string& sa = (*ra)[c_sum];
        const std::string& sb = rb[c_sum];
        if (!sa.empty() && !sb.empty()) {
            const double x = std::stod(sa), y = std::stod(sb);
            if (std::abs(x - y) > tol * std::max({1.0, std::abs(x), std::abs(y)})) d.checksum_diffs.push_back(key);
        } else if (sa.empty() != sb.empty()) {
            d.checksum_diffs.push_back(key);
        }
        if (!(*ra)[c_med].empty() && !rb[c_med].empty()) {
            const double ta = std::stod((*ra)[c_med]);
            if (ta > 0) d.speed_ratio[key] = std::stod(rb[c_med]) / ta;
        }
    }
    for (const auto& [key, rb] : ib)
        if (!ia.count(key)) d.added.push_back(key);
    return d;
}

}  // namespace spikekern
