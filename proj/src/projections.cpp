#include "spikekern/projections.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spikekern/sparse_kernels.hpp"

namespace spikekern {

DelayBuffer::DelayBuffer(std::size_t population_size, std::size_t max_delay_steps)
    : size_(population_size), ring_(max_delay_steps + 1, SpikeVector(population_size))
{
}

void DelayBuffer::write(const SpikeVector& spikes)
{
    require_same_size(spikes.size(), size_, "delay buffer write");
    head_ = (head_ + 1) % ring_.size();
    ring_[head_] = spikes;
}

const SpikeVector& DelayBuffer::read(std::size_t delay) const
{
    if (delay >= ring_.size())
        throw ValidationError("delay " + std::to_string(delay) + " exceeds buffer depth " +
                              std::to_string(max_delay()));
    return ring_[(head_ + ring_.size() - delay) % ring_.size()];
}

std::size_t comm_pre_size(const Comm& c)
{
    return std::visit(
        [](const auto& m) -> std::size_t {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, DenseMatrix>) return m.rows();
            else if constexpr (std::is_same_v<M, CsrMatrix>) return m.n_rows();
            else return m.n_rows;
        },
        c);
}

std::size_t comm_post_size(const Comm& c)
{
    return std::visit(
        [](const auto& m) -> std::size_t {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, DenseMatrix>) return m.cols();
            else if constexpr (std::is_same_v<M, CsrMatrix>) return m.n_cols();
            else return m.n_cols;
        },
        c);
}

std::size_t comm_state_bytes(const Comm& c)
{
    return std::visit(
        [](const auto& m) -> std::size_t {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, JitConnSpec>) return JitConnSpec::state_bytes();
            else return m.state_bytes();
        },
        c);
}

const char* comm_kind_name(const Comm& c)
{
    switch (c.index()) {
    case 0: return "dense";
    case 1: return "sparse";
    default: return "jitconn";
    }
}

void comm_apply_events(const Comm& c, const SpikeVector& pre, std::span<Real> post, Exec exec)
{
    require_same_size(pre.size(), comm_pre_size(c), "comm events");
    require_same_size(post.size(), comm_post_size(c), "comm output");
    std::visit(
        [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, DenseMatrix>) {
                std::fill(post.begin(), post.end(), Real{0});
                for (std::size_t i = 0; i < m.rows(); ++i) {
                    if (!pre[i]) continue;
                    const auto row = m.row(i);
                    for (std::size_t j = 0; j < row.size(); ++j) post[j] += row[j];
                }
            } else if constexpr (std::is_same_v<M, CsrMatrix>) {
                event_csrmv_into(m, pre, true, post, exec);
            } else {
                jitconn_event_matvec_into(m, pre, true, post, exec);
            }
        },
        c);
}

void comm_apply(const Comm& c, std::span<const Real> pre, std::span<Real> post, Exec exec)
{
    std::visit(
        [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, DenseMatrix>) dense_matvec_into(m, pre, true, post);
            else if constexpr (std::is_same_v<M, CsrMatrix>) csrmv_into(m, pre, true, post, exec);
            else jitconn_matvec_into(m, pre, true, post, exec);
        },
        c);
}

void ProjectionSpec::validate(std::size_t pre_size, std::size_t post_size) const
{
    const std::string who = name.empty() ? std::string("projection") : "projection '" + name + "'";
    if (comm_pre_size(comm) != pre_size || comm_post_size(comm) != post_size)
        throw DimensionError(who + ": comm is " + std::to_string(comm_pre_size(comm)) + "x" +
                             std::to_string(comm_post_size(comm)) + ", populations are " +
                             std::to_string(pre_size) + "x" + std::to_string(post_size));
    if (!(syn_tau > 0) || !std::isfinite(syn_tau)) throw ValidationError(who + ": syn_tau must be > 0");
    if (const auto* coba = std::get_if<Coba>(&out); coba && !std::isfinite(coba->e_rev))
        throw ValidationError(who + ": e_rev must be finite");
    if (const auto* jit = std::get_if<JitConnSpec>(&comm)) jit->validate();
}

MergeKey MergeKey::of(const ProjectionSpec& p)
{
    MergeKey k;
    k.mode = p.mode;
    k.tau = p.syn_tau;
    if (p.mode == AlignMode::Post) {
        k.population = p.post;
        k.out_kind = static_cast<int>(p.out.index());
        if (const auto* coba = std::get_if<Coba>(&p.out)) k.e_rev = coba->e_rev;
    } else {
        k.population = p.pre;
        k.delay_steps = p.delay_steps;
    }
    return k;
}

SharedSynapse::SharedSynapse(MergeKey key, std::size_t size, Real tau, SynOutput out)
    : key_(key), out_(out), state_(size, tau)
{
}

void SharedSynapse::advance(std::int64_t step, double dt)
{
    if (decayed_step_ == step) return;
    expon_decay(state_, dt);
    decayed_step_ = step;
    ++decay_calls_;
}

bool SharedSynapse::claim_increment(std::int64_t step)
{
    if (incremented_step_ == step) return false;
    incremented_step_ = step;
    return true;
}

MergeRegistry::Insertion MergeRegistry::insert(const MergeKey& key, std::size_t size, Real tau, SynOutput out)
{
    if (merge_) {
        if (auto it = index_.find(key); it != index_.end()) {
            const auto& s = states_[it->second];
            if (s.size() != size)
                throw MergeContractError("merge key shared by states of size " + std::to_string(s.size()) +
                                         " and " + std::to_string(size));
            return {it->second, false};
        }
    }
    states_.emplace_back(key, size, tau, out);
    const std::size_t handle = states_.size() - 1;
    if (merge_) index_.emplace(key, handle);
    return {handle, true};
}

std::size_t MergeRegistry::total_scalars() const
{
    std::size_t n = 0;
    for (const auto& s : states_) n += s.size();
    return n;
}

namespace {

void check_contract(const ProjectionSpec& proj, const SharedSynapse& shared, AlignMode mode)
{
    if (proj.mode != mode || shared.key().mode != mode)
        throw MergeContractError("projection '" + proj.name + "' used with the wrong alignment");
    if (proj.syn_tau != shared.state().tau_decay)
        throw MergeContractError("projection '" + proj.name + "' disagrees with its shared state on tau");
    if (mode == AlignMode::Post && !(proj.out == shared.output()))
        throw MergeContractError("projection '" + proj.name + "' disagrees with its shared state on output");
}

}  // namespace

void align_post_deliver(const ProjectionSpec& proj, SharedSynapse& shared, const SpikeVector& delayed_spikes,
                        std::int64_t step, double dt, std::span<Real> scratch, Exec exec)
{
    check_contract(proj, shared, AlignMode::Post);
    require_same_size(shared.size(), comm_post_size(proj.comm), "AlignPost state");
    shared.advance(step, dt);
    if (delayed_spikes.count() == 0) return;
    comm_apply_events(proj.comm, delayed_spikes, scratch, exec);
    expon_increment(shared.state(), scratch);
}

void align_post_current(const SharedSynapse& shared, std::span<const Real> post_v, std::span<Real> current_acc)
{
    syn_output_accumulate(shared.state().g, post_v, shared.output(), current_acc);
}

std::vector<Real> align_post_step(const ProjectionSpec& proj, SharedSynapse& shared, const SpikeVector& delayed_spikes,
                                  std::span<const Real> post_v, double dt, std::int64_t step)
{
    std::vector<Real> scratch(shared.size());
    align_post_deliver(proj, shared, delayed_spikes, step, dt, scratch);
    return syn_output(shared.state().g, post_v, shared.output());
}

void align_pre_deliver(const ProjectionSpec& proj, SharedSynapse& shared, const SpikeVector& delayed_spikes,
                       std::int64_t step, double dt)
{
    check_contract(proj, shared, AlignMode::Pre);
    require_same_size(shared.size(), comm_pre_size(proj.comm), "AlignPre state");
    require_same_size(delayed_spikes.size(), shared.size(), "AlignPre spikes");
    shared.advance(step, dt);
    if (!shared.claim_increment(step)) return;
    auto& g = shared.state().g;
    const auto bits = delayed_spikes.bits();
    for (std::size_t i = 0; i < g.size(); ++i)
        if (bits[i]) g[i] += Real{1};
}

void align_pre_current(const ProjectionSpec& proj, const SharedSynapse& shared, std::span<const Real> post_v,
                       std::span<Real> current_acc, std::span<Real> scratch, Exec exec)
{
    check_contract(proj, shared, AlignMode::Pre);
    comm_apply(proj.comm, shared.state().g, scratch, exec);
    syn_output_accumulate(scratch, post_v, proj.out, current_acc);
}

std::vector<Real> align_pre_step(const ProjectionSpec& proj, SharedSynapse& shared, const SpikeVector& delayed_spikes,
                                 std::span<const Real> post_v, double dt, std::int64_t step)
{
    align_pre_deliver(proj, shared, delayed_spikes, step, dt);
    std::vector<Real> scratch(comm_post_size(proj.comm));
    std::vector<Real> current(post_v.size(), Real{0});
    align_pre_current(proj, shared, post_v, current, scratch);
    return current;
}

}  // namespace spikekern
