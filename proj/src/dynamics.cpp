#include "spikekern/dynamics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "spikekern/counter_rng.hpp"

namespace spikekern {

namespace {

void check_dt(double dt)
{
    if (!(dt > 0)) throw ValidationError("dt must be > 0, got " + std::to_string(dt));
}

// Times closer than this (ms) count as equal when testing refractoriness.
constexpr double kTimeEps = 1e-9;

}  // namespace

void LifParams::validate() const
{
    if (!(tau > 0)) throw ValidationError("LIF tau must be > 0");
    if (!(tau_ref >= 0)) throw ValidationError("LIF tau_ref must be >= 0");
    if (!(v_reset <= v_th)) throw ValidationError("LIF v_reset must be <= v_th");
}

LifState::LifState(std::size_t n, Real v0)
    : v(n, v0), ref_until(n, -std::numeric_limits<Real>::infinity()), spike(n)
{
}

const SpikeVector& lif_step(LifState& s, const LifParams& p, std::span<const Real> input, double t, double dt)
{
    check_dt(dt);
    require_same_size(input.size(), s.size(), "lif_step input");
    require_same_size(s.ref_until.size(), s.size(), "lif_step ref_until");
    const Real decay = static_cast<Real>(std::exp(-dt / p.tau));
    auto bits = s.spike.bits();
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.ref_until[i] - t > kTimeEps) {
            s.v[i] = p.v_reset;
            bits[i] = 0;
            continue;
        }
        const Real steady = p.v_rest + p.r * input[i];
        const Real v = steady + (s.v[i] - steady) * decay;
        if (v > p.v_th) {
            s.v[i] = p.v_reset;
            s.ref_until[i] = static_cast<Real>(t + p.tau_ref);
            bits[i] = 1;
        } else {
            s.v[i] = v;
            bits[i] = 0;
        }
    }
    return s.spike;
}

void GifParams::validate(std::size_t n) const
{
    require_same_size(tau_i2.size(), n, "GIF tau_i2");
    if (!(tau_i1 > 0 && tau_v > 0)) throw ValidationError("GIF time constants must be > 0");
    for (Real t : tau_i2)
        if (!(t > 0)) throw ValidationError("GIF tau_i2 must be > 0");
}

GifState::GifState(std::size_t n, Real v0) : i1(n, Real{0}), i2(n, Real{0}), v(n, v0), spike(n) {}

const SpikeVector& gif_step(GifState& s, const GifParams& p, std::span<const Real> input, double dt)
{
    check_dt(dt);
    require_same_size(input.size(), s.size(), "gif_step input");
    require_same_size(p.tau_i2.size(), s.size(), "gif_step tau_i2");
    const Real a_i1 = static_cast<Real>(std::exp(-dt / p.tau_i1));
    const Real a_v = static_cast<Real>(std::exp(-dt / p.tau_v));
    const Real step = static_cast<Real>(dt);
    auto bits = s.spike.bits();
    for (std::size_t i = 0; i < s.size(); ++i) {
        const bool z = bits[i] != 0;
        const Real a_i2 = static_cast<Real>(std::exp(-dt / p.tau_i2[i]));
        const Real i1 = z ? p.a1 : a_i1 * s.i1[i];
        const Real i2 = a_i2 * s.i2[i] + (z ? p.a2 : Real{0});
        Real v = a_v * s.v[i] + (p.v_rest + p.r * (i1 + i2 + input[i])) * step;
        const bool fire = v > p.v_th;
        if (fire) v = p.v_rest;
        s.i1[i] = i1;
        s.i2[i] = i2;
        s.v[i] = v;
        bits[i] = fire ? 1 : 0;
    }
    return s.spike;
}

std::vector<Real> sample_tau_i2(std::size_t n, std::uint64_t seed, Real lo, Real hi)
{
    std::vector<Real> out(n);
    const std::uint64_t key = stream_key(seed, 0);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = static_cast<Real>(lo + (hi - lo) * open01_from_word(counter_word(key, i)));
    }
    return out;
}

void expon_decay(ExponSynState& s, double dt)
{
    check_dt(dt);
    const Real f = static_cast<Real>(std::exp(-dt / s.tau_decay));
    for (auto& g : s.g) g *= f;
}

void expon_increment(ExponSynState& s, std::span<const Real> inc)
{
    require_same_size(inc.size(), s.g.size(), "expon_increment");
    for (std::size_t i = 0; i < inc.size(); ++i) s.g[i] += inc[i];
}

void syn_output_accumulate(std::span<const Real> g, std::span<const Real> v, const SynOutput& out, std::span<Real> acc)
{
    require_same_size(v.size(), g.size(), "syn_output v");
    require_same_size(acc.size(), g.size(), "syn_output out");
    if (const auto* coba = std::get_if<Coba>(&out)) {
        for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i] * (coba->e_rev - v[i]);
    } else {
        for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i];
    }
}

std::vector<Real> syn_output(std::span<const Real> g, std::span<const Real> v, const SynOutput& out)
{
    std::vector<Real> acc(g.size(), Real{0});
    syn_output_accumulate(g, v, out, acc);
    return acc;
}

Real surrogate_relu_grad(Real x, Real alpha, Real width)
{
    const Real y = alpha * (width - std::abs(x));
    return y > 0 ? y : Real{0};
}

}  // namespace spikekern
