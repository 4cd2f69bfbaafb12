#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "spikekern/csr.hpp"
#include "spikekern/dense.hpp"
#include "spikekern/dynamics.hpp"
#include "spikekern/jitconn.hpp"
#include "spikekern/spike_vector.hpp"

namespace spikekern {

/// Ring of the last max_delay + 1 spike vectors of one population.
class DelayBuffer {
public:
    DelayBuffer() = default;
    DelayBuffer(std::size_t population_size, std::size_t max_delay_steps);

    /// Advances the head and stores `spikes` as the newest entry.
    void write(const SpikeVector& spikes);
    /// The vector written `delay` writes ago (0 = newest). Never-written slots are silent.
    const SpikeVector& read(std::size_t delay) const;

    std::size_t max_delay() const { return ring_.empty() ? 0 : ring_.size() - 1; }
    std::size_t population_size() const { return size_; }
    std::size_t state_bytes() const { return ring_.size() * size_; }

private:
    std::size_t size_ = 0;
    std::size_t head_ = 0;
    std::vector<SpikeVector> ring_;
};

/// Communication matrix of a projection, pre-major (rows = pre, cols = post).
using Comm = std::variant<DenseMatrix, CsrMatrix, JitConnSpec>;

std::size_t comm_pre_size(const Comm& c);
std::size_t comm_post_size(const Comm& c);
std::size_t comm_state_bytes(const Comm& c);
const char* comm_kind_name(const Comm& c);

/// post = M^T 1[pre spikes]; event-driven for sparse and JIT comms.
void comm_apply_events(const Comm& c, const SpikeVector& pre, std::span<Real> post, Exec exec = {});
/// post = M^T x for a real pre-side vector (non-event kernels).
void comm_apply(const Comm& c, std::span<const Real> pre, std::span<Real> post, Exec exec = {});

enum class AlignMode { Pre, Post };

struct ProjectionSpec {
    std::size_t pre = 0;
    std::size_t post = 0;
    Comm comm;
    std::size_t delay_steps = 0;
    Real syn_tau = 5;
    SynOutput out = Coba{};
    AlignMode mode = AlignMode::Post;
    std::string name;

    void validate(std::size_t pre_size, std::size_t post_size) const;
};

/// Projections with equal keys share one synapse state.
/// AlignPost: (post, tau, output); AlignPre: (pre, delay, tau).
struct MergeKey {
    AlignMode mode = AlignMode::Post;
    std::size_t population = 0;
    std::size_t delay_steps = 0;
    Real tau = 0;
    int out_kind = -1;
    Real e_rev = 0;

    static MergeKey of(const ProjectionSpec& p);
    auto operator<=>(const MergeKey&) const = default;
};

/// Exponential synapse state shared by a merge group. Decay and AlignPre
/// increments are idempotent per global step, so every projection in the
/// group can call them and the state still advances exactly once.
class SharedSynapse {
public:
    SharedSynapse(MergeKey key, std::size_t size, Real tau, SynOutput out);

    const MergeKey& key() const { return key_; }
    const SynOutput& output() const { return out_; }
    const ExponSynState& state() const { return state_; }
    ExponSynState& state() { return state_; }
    std::size_t size() const { return state_.g.size(); }

    /// Decays once for `step`; later calls with the same step are no-ops.
    void advance(std::int64_t step, double dt);
    /// Claims the one increment allowed per step; false if already claimed.
    bool claim_increment(std::int64_t step);

    std::uint64_t decay_calls() const { return decay_calls_; }

private:
    MergeKey key_;
    SynOutput out_;
    ExponSynState state_;
    std::int64_t decayed_step_ = -1;
    std::int64_t incremented_step_ = -1;
    std::uint64_t decay_calls_ = 0;
};

class MergeRegistry {
public:
    explicit MergeRegistry(bool merge = true) : merge_(merge) {}

    struct Insertion {
        std::size_t handle;
        bool created;
    };

    /// Returns the existing state for `key` or creates one. With merging
    /// disabled every call creates a new state. Throws MergeContractError if an
    /// existing state has a different size.
    Insertion insert(const MergeKey& key, std::size_t size, Real tau, SynOutput out);

    SharedSynapse& at(std::size_t handle) { return states_.at(handle); }
    const SharedSynapse& at(std::size_t handle) const { return states_.at(handle); }
    std::size_t group_count() const { return states_.size(); }
    bool merging() const { return merge_; }

    /// Synapse scalars held across all groups.
    std::size_t total_scalars() const;

    std::vector<SharedSynapse>& states() { return states_; }
    const std::vector<SharedSynapse>& states() const { return states_; }

private:
    bool merge_;
    std::map<MergeKey, std::size_t> index_;
    std::vector<SharedSynapse> states_;
};

/// Delivers one projection's delayed spikes into its post-aligned state:
/// the state decays once for `step`, then g += M^T spikes (weights carried by comm).
void align_post_deliver(const ProjectionSpec& proj, SharedSynapse& shared, const SpikeVector& delayed_spikes,
                        std::int64_t step, double dt, std::span<Real> scratch, Exec exec = {});
/// Synaptic current of a post-aligned group: syn_output(g, V_post).
void align_post_current(const SharedSynapse& shared, std::span<const Real> post_v, std::span<Real> current_acc);

/// deliver + current for a single projection.
std::vector<Real> align_post_step(const ProjectionSpec& proj, SharedSynapse& shared, const SpikeVector& delayed_spikes,
                                  std::span<const Real> post_v, double dt, std::int64_t step = 0);

/// Pre-aligned trace: decays once for `step`, then g += 1 per delayed spike (once per step).
void align_pre_deliver(const ProjectionSpec& proj, SharedSynapse& shared, const SpikeVector& delayed_spikes,
                       std::int64_t step, double dt);
/// Current of one pre-aligned projection: syn_output(M^T g, V_post).
void align_pre_current(const ProjectionSpec& proj, const SharedSynapse& shared, std::span<const Real> post_v,
                       std::span<Real> current_acc, std::span<Real> scratch, Exec exec = {});

std::vector<Real> align_pre_step(const ProjectionSpec& proj, SharedSynapse& shared, const SpikeVector& delayed_spikes,
                                 std::span<const Real> post_v, double dt, std::int64_t step = 0);

}  // namespace spikekern
