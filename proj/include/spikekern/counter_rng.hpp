#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace spikekern {

// Counter-based generator. The k-th word of stream (seed, row) is
//
//   key      = mix64(seed ^ (row * kGolden))
//   word(k)  = mix64(key + (k + 1) * kGolden)
//
// i.e. a SplitMix64 sequence started at `key`. Every draw is a pure function of
// (seed, row, k), so any draw can be replayed or skipped without generating
// its predecessors. These constants fix every JIT matrix bit for bit; changing
// them changes all connectivity.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t row)
{
    return mix64(seed ^ (row * kGolden));
}

constexpr std::uint64_t counter_word(std::uint64_t key, std::uint64_t k)
{
    return mix64(key + (k + 1) * kGolden);
}

/// Uniform integer in [1, bound] by fixed-point multiply-shift (no modulo).
inline std::uint64_t bounded_from_word(std::uint64_t word, std::uint64_t bound)
{
    return 1 + static_cast<std::uint64_t>((static_cast<unsigned __int128>(word) * bound) >> 64);
}

/// Uniform double in the open interval (0, 1).
inline double open01_from_word(std::uint64_t word)
{
    return (static_cast<double>(word >> 11) + 0.5) * 0x1.0p-53;
}

/// Sequential view over one (seed, row) stream.
class RowSampler {
public:
    RowSampler(std::uint64_t seed, std::uint64_t row) : key_(stream_key(seed, row)) {}

    std::uint64_t counter() const { return counter_; }
    void skip(std::uint64_t n) { counter_ += n; }

    std::uint64_t next_word() { return counter_word(key_, counter_++); }
    std::uint64_t uniform_int(std::uint64_t bound) { return bounded_from_word(next_word(), bound); }
    double uniform01() { return open01_from_word(next_word()); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Box-Muller on two words; uses the cosine branch only so the draw count is fixed.
    double normal(double mu, double sigma)
    {
        const double u1 = uniform01();
        const double u2 = uniform01();
        return mu + sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Derives an independent child seed from a master seed and a label.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index = 0);

}  // namespace spikekern
