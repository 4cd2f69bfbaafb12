#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "spikekern/spike_vector.hpp"
#include "spikekern/types.hpp"

namespace spikekern {

// Units: mV for potentials, ms for times. Currents are in whatever unit makes
// R * I a potential in mV; R is a dimensionless multiplier.

struct LifParams {
    Real v_rest = -60;
    Real v_reset = -60;
    Real v_th = -50;
    Real tau = 20;
    Real tau_ref = 5;
    Real r = 1;

    void validate() const;
};

struct LifState {
    std::vector<Real> v;
    /// Absolute time (ms) at which refractoriness ends.
    std::vector<Real> ref_until;
    SpikeVector spike;

    LifState() = default;
    LifState(std::size_t n, Real v0);

    std::size_t size() const { return v.size(); }
};

/// Advances LIF neurons from t to t + dt by exponential Euler:
///   V <- V_rest + R I + (V - V_rest - R I) exp(-dt / tau)
/// A neuron with V > V_th afterwards spikes, resets to v_reset and is
/// refractory (held at v_reset, unable to spike) until t + tau_ref.
const SpikeVector& lif_step(LifState& state, const LifParams& params, std::span<const Real> input_current, double t,
                            double dt);

/// Modified GIF neuron with a fast (I1) and a slow (I2) spike-triggered current.
struct GifParams {
    Real a1 = 0;
    Real a2 = Real(-0.6);
    Real tau_i1 = 10;
    /// Per-neuron slow time constants.
    std::vector<Real> tau_i2;
    Real tau_v = 20;
    Real v_rest = 0;
    Real v_th = 1;
    Real r = 1;

    void validate(std::size_t n) const;
};

struct GifState {
    std::vector<Real> i1;
    std::vector<Real> i2;
    std::vector<Real> v;
    SpikeVector spike;

    GifState() = default;
    GifState(std::size_t n, Real v0);

    std::size_t size() const { return v.size(); }
};

/// One step of the discrete GIF update, applied verbatim:
///   I1' = z ? A1 : a_I1 I1
///   I2' = a_I2 I2 + A2 z
///   V'  = a_V V + (V_rest + R (I1' + I2' + I_ext)) dt
///   z'  = V' > V_th, and V' <- V_rest where z'
/// with a_X = exp(-dt / tau_X). Note the additive term is not scaled by
/// 1/tau_V, so V_rest is a fixed point only when V_rest = 0.
const SpikeVector& gif_step(GifState& state, const GifParams& params, std::span<const Real> input_current, double dt);

/// tau_I2 ~ U[lo, hi] per neuron from the counter generator keyed by seed.
std::vector<Real> sample_tau_i2(std::size_t n, std::uint64_t seed, Real lo = 100, Real hi = 3000);

struct ExponSynState {
    std::vector<Real> g;
    Real tau_decay = 5;

    ExponSynState() = default;
    ExponSynState(std::size_t n, Real tau) : g(n, Real{0}), tau_decay(tau) {}
};

void expon_decay(ExponSynState& state, double dt);
void expon_increment(ExponSynState& state, std::span<const Real> increments);

struct Coba {
    Real e_rev = 0;
    bool operator==(const Coba&) const = default;
};
struct Cuba {
    bool operator==(const Cuba&) const = default;
};
using SynOutput = std::variant<Coba, Cuba>;

/// COBA: I = g (E - V); CUBA: I = g.
std::vector<Real> syn_output(std::span<const Real> g, std::span<const Real> v, const SynOutput& out);
/// Adds the synaptic current to `acc`.
void syn_output_accumulate(std::span<const Real> g, std::span<const Real> v, const SynOutput& out,
                           std::span<Real> acc);

/// max(0, alpha (width - |x|))
Real surrogate_relu_grad(Real x, Real alpha = Real(0.3), Real width = Real(1.0));

}  // namespace spikekern
