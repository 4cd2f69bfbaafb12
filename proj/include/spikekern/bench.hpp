#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spikekern/exec.hpp"
#include "spikekern/jitconn.hpp"

namespace spikekern {

struct TimingStats {
    std::size_t reps = 0;
    double median_ns = 0;
    double mean_ns = 0;
    double p10_ns = 0;
    double p90_ns = 0;
};

/// Runs fn warmup times untimed, then reps times on a monotonic clock.
TimingStats time_reps(const std::function<void()>& fn, std::size_t reps, std::size_t warmup = 1);
/// Median and linearly interpolated percentiles of raw samples.
TimingStats summarize_ns(std::vector<double> samples);

struct BenchResult {
    std::string bench;
    std::string case_id;
    std::string kernel;
    std::size_t rows = 0;
    std::size_t cols = 0;
    double density = 0;
    double rate_hz = 0;
    TimingStats timing;
    /// Median per-call time scaled to one simulated second (1000 / dt calls); 0 if not applicable.
    double loop_ms = 0;
    std::size_t state_bytes = 0;
    double checksum = 0;
    bool skipped = false;
    std::string note;
};

/// Column order of the CSV schema.
const std::vector<std::string>& bench_csv_header();
void write_bench_csv(std::ostream& os, const std::vector<BenchResult>& results);
nlohmann::json bench_results_json(const std::vector<BenchResult>& results);

struct EventBenchOptions {
    std::size_t n = 50'000;
    double p = 0.01;
    std::vector<double> rates_hz{10, 100, 1000};
    double dt = 0.1;
    std::size_t reps = 10;
    std::size_t warmup = 2;
    std::uint64_t seed = 42;
    unsigned threads = 1;
    /// The dense baseline never allocates more than this; larger shapes time a
    /// block of output rows and scale the time linearly.
    std::size_t dense_guard_bytes = std::size_t{256} << 20;
};

/// dense_matvec, csrmv and event_csrmv on one random CSR matrix and Bernoulli
/// spike patterns of density rate * dt / 1000. Outputs are compared before any
/// time is reported; a mismatch throws CheckFailure.
std::vector<BenchResult> bench_event_kernels(const EventBenchOptions& opts);

struct JitBenchOptions {
    /// (rows, cols) of each case.
    std::vector<std::pair<std::size_t, std::size_t>> shapes{{1000, 1000}, {10'000, 10'000}, {100'000, 100'000}};
    double p = 0.01;
    WeightDist dist = HomoDist{1};
    std::size_t reps = 5;
    std::size_t warmup = 1;
    std::uint64_t seed = 42;
    unsigned threads = 1;
    std::size_t dense_guard_bytes = std::size_t{256} << 20;
    std::size_t sparse_guard_bytes = std::size_t{1} << 30;
    /// When set, time the event (scatter) products on Bernoulli spikes of
    /// density events_hz * dt / 1000 instead of the real-valued gather products.
    std::optional<double> events_hz;
    double dt = 0.1;
};

/// Dense, materialized sparse and JIT products on the same implied matrix.
/// State bytes are analytic and reported even for skipped kernels.
std::vector<BenchResult> bench_jitconn(const JitBenchOptions& opts);

struct SamplerBench {
    BenchResult uniform;
    BenchResult geometric;
    double uniform_mean = 0;
    double uniform_expected = 0;
    double geometric_mean = 0;
    double geometric_expected = 0;

    bool means_within(double rel) const;
    bool uniform_faster() const { return uniform.timing.median_ns < geometric.timing.median_ns; }
};

/// Times `draws` uniform-gap draws U[1, K] against geometric inversion draws.
SamplerBench bench_gap_samplers(double p, std::size_t draws = 10'000'000, std::size_t reps = 5,
                                std::uint64_t seed = 42);

/// A parsed CSV: header plus rows of string cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(std::istream& is);

struct CsvDiff {
    bool schema_equal = false;
    std::vector<std::string> missing;         // row keys only in the first file
    std::vector<std::string> added;           // row keys only in the second file
    std::vector<std::string> checksum_diffs;  // keys whose checksum differs
    /// median_ns(b) / median_ns(a) per common key.
    std::map<std::string, double> speed_ratio;

    bool equivalent() const { return schema_equal && missing.empty() && added.empty() && checksum_diffs.empty(); }
};

/// Compares two benchmark CSVs keyed by (bench, case, kernel).
CsvDiff diff_bench_csv(const CsvTable& a, const CsvTable& b, double checksum_rel_tol = 1e-10);

}  // namespace spikekern
