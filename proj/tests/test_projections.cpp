#include <doctest.h>

#include <cmath>
#include <deque>

#include "gen.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"
#include "spikekern/projections.hpp"

using namespace spikekern;

namespace {

ProjectionSpec post_proj(std::size_t pre, std::size_t post, Comm c, Real tau, SynOutput out = Coba{0},
                         std::size_t delay = 0)
{
    ProjectionSpec p;
    p.pre = pre;
    p.post = post;
    p.comm = std::move(c);
    p.syn_tau = tau;
    p.out = out;
    p.delay_steps = delay;
    return p;
}

}  // namespace

TEST_CASE("delay buffer examples")
{
    DelayBuffer buf(4, 3);
    const auto s = SpikeVector::from_indices(4, std::vector<Index>{1, 3});
    buf.write(s);
    CHECK(buf.read(0) == s);
    CHECK(buf.read(1).count() == 0);

    DelayBuffer d(3, 4);
    std::vector<SpikeVector> written;
    for (Index k = 0; k < 4; ++k) {
        written.push_back(SpikeVector::from_indices(3, std::vector<Index>{k % 3}));
        d.write(written.back());
    }
    CHECK(d.read(3) == written[0]);
    CHECK_THROWS_AS(d.read(5), ValidationError);
    CHECK(d.state_bytes() == 15);
}

TEST_CASE("delay buffer matches a full-history list")
{
    gen::Rng rng(10);
    for (int it = 0; it < 20; ++it) {
        const std::size_t n = gen::size_in(rng, 1, 20);
        const std::size_t depth = gen::size_in(rng, 0, 8);
        DelayBuffer buf(n, depth);
        std::vector<SpikeVector> history;
        for (int k = 0; k < 200; ++k) {
            if (gen::size_in(rng, 0, 2) > 0) {
                history.push_back(gen::spikes(rng, n, 0.3));
                buf.write(history.back());
            }
            const std::size_t d = gen::size_in(rng, 0, depth);
            const SpikeVector want = d < history.size() ? history[history.size() - 1 - d] : SpikeVector(n);
            CHECK(buf.read(d) == want);
        }
    }
}

TEST_CASE("merge registry examples")
{
    const auto a = post_proj(0, 2, DenseMatrix(3, 4), 5);
    const auto b = post_proj(1, 2, DenseMatrix(5, 4), 5);
    const auto c = post_proj(1, 2, DenseMatrix(5, 4), 10);

    MergeRegistry reg;
    const auto ia = reg.insert(MergeKey::of(a), 4, 5, a.out);
    const auto ib = reg.insert(MergeKey::of(b), 4, 5, b.out);
    CHECK(ia.created);
    CHECK_FALSE(ib.created);
    CHECK(ia.handle == ib.handle);
    CHECK(reg.insert(MergeKey::of(c), 4, 10, c.out).created);
    CHECK(reg.group_count() == 2);
    CHECK_THROWS_AS(reg.insert(MergeKey::of(a), 7, 5, a.out), MergeContractError);

    const auto cuba = post_proj(0, 2, DenseMatrix(3, 4), 5, Cuba{});
    const auto inhib = post_proj(0, 2, DenseMatrix(3, 4), 5, Coba{-80});
    CHECK(reg.insert(MergeKey::of(cuba), 4, 5, cuba.out).created);
    CHECK(reg.insert(MergeKey::of(inhib), 4, 5, inhib.out).created);
}

TEST_CASE("k projections sharing a key store one state")
{
    for (bool merge : {true, false}) {
        MergeRegistry reg(merge);
        for (std::size_t k = 0; k < 5; ++k) reg.insert(MergeKey::of(post_proj(k, 9, DenseMatrix(2, 30), 5)), 30, 5, Coba{0});
        CHECK(reg.total_scalars() == (merge ? 30u : 150u));
    }
}

TEST_CASE("align pre one-to-many keeps one trace")
{
    ProjectionSpec a = post_proj(0, 1, DenseMatrix(6, 4), 5);
    ProjectionSpec b = post_proj(0, 2, DenseMatrix(6, 9), 5);
    a.mode = b.mode = AlignMode::Pre;
    b.out = Cuba{};
    MergeRegistry reg;
    reg.insert(MergeKey::of(a), 6, 5, a.out);
    reg.insert(MergeKey::of(b), 6, 5, b.out);
    CHECK(reg.group_count() == 1);
    CHECK(reg.total_scalars() == 6);
}

TEST_CASE("shared decay runs once per step")
{
    SharedSynapse s(MergeKey{}, 3, 5, Coba{0});
    s.state().g.assign(3, 1);
    for (int k = 0; k < 4; ++k) s.advance(7, 0.1);
    CHECK(s.decay_calls() == 1);
    CHECK(s.state().g[0] == doctest::Approx(std::exp(-0.1 / 5)));
    s.advance(8, 0.1);
    CHECK(s.decay_calls() == 2);
    CHECK(s.claim_increment(8));
    CHECK_FALSE(s.claim_increment(8));
}

TEST_CASE("align post pure decay follows g0 exp(-t / tau) (E - V)")
{
    const auto p = post_proj(0, 1, DenseMatrix(2, 3), 5);
    SharedSynapse s(MergeKey::of(p), 3, 5, p.out);
    s.state().g = {1, 2, 0.5};
    const std::vector<Real> v{-60, -50, -70};
    const SpikeVector none(2);
    for (int k = 0; k < 50; ++k) {
        const auto i = align_post_step(p, s, none, v, 0.1, k);
        const double f = std::exp(-0.1 * (k + 1) / 5);
        CHECK(i[0] == doctest::Approx(1 * f * 60).epsilon(1e-12));
        CHECK(i[1] == doctest::Approx(2 * f * 50).epsilon(1e-12));
    }
}

TEST_CASE("align post sums two populations each firing once")
{
    DenseMatrix w0(1, 2), w1(1, 2);
    w0(0, 0) = 0.6;
    w0(0, 1) = 0.3;
    w1(0, 1) = 6.7;
    const auto p0 = post_proj(0, 2, w0, 5, Cuba{});
    const auto p1 = post_proj(1, 2, w1, 5, Cuba{});
    MergeRegistry reg;
    const auto h = reg.insert(MergeKey::of(p0), 2, 5, Cuba{}).handle;
    reg.insert(MergeKey::of(p1), 2, 5, Cuba{});
    auto& s = reg.at(h);
    const SpikeVector on = SpikeVector::from_indices(1, std::vector<Index>{0});
    const SpikeVector off(1);
    std::vector<Real> scratch(2);
    const double dt = 0.1;
    for (int k = 0; k < 100; ++k) {
        align_post_deliver(p0, s, k == 10 ? on : off, k, dt, scratch);
        align_post_deliver(p1, s, k == 40 ? on : off, k, dt, scratch);
    }
    const double g0 = 0.6 * std::exp(-dt * 89 / 5);
    const double g1 = 0.3 * std::exp(-dt * 89 / 5) + 6.7 * std::exp(-dt * 59 / 5);
    CHECK(std::abs(s.state().g[0] - g0) < 1e-12);
    CHECK(std::abs(s.state().g[1] - g1) < 1e-12);
    CHECK(s.decay_calls() == 100);
}

TEST_CASE("align pre with identity comm scales the trace by (E - V)")
{
    auto p = post_proj(0, 1, DenseMatrix::identity(3), 5, Coba{0});
    p.mode = AlignMode::Pre;
    SharedSynapse s(MergeKey::of(p), 3, 5, p.out);
    const std::vector<Real> v{-60, -65, -70};
    const auto i = align_pre_step(p, s, SpikeVector::from_indices(3, std::vector<Index>{0, 2}), v, 0.1);
    CHECK(i[0] == doctest::Approx(60));
    CHECK(i[1] == 0);
    CHECK(i[2] == doctest::Approx(70));
}

TEST_CASE("contract violations")
{
    auto p = post_proj(0, 1, DenseMatrix(2, 3), 5);
    SharedSynapse wrong_tau(MergeKey::of(post_proj(0, 1, DenseMatrix(2, 3), 7)), 3, 7, Coba{0});
    std::vector<Real> scratch(3);
    CHECK_THROWS_AS(align_post_deliver(p, wrong_tau, SpikeVector(2), 0, 0.1, scratch), MergeContractError);
    SharedSynapse wrong_out(MergeKey::of(p), 3, 5, Cuba{});
    CHECK_THROWS_AS(align_post_deliver(p, wrong_out, SpikeVector(2), 0, 0.1, scratch), MergeContractError);
    auto q = p;
    q.mode = AlignMode::Pre;
    SharedSynapse pre_state(MergeKey::of(q), 2, 5, Coba{0});
    CHECK_THROWS_AS(align_post_deliver(p, pre_state, SpikeVector(2), 0, 0.1, scratch), MergeContractError);
    CHECK_THROWS_AS(p.validate(3, 3), DimensionError);
}

TEST_CASE("reduced synapses equal the per-synapse oracle")
{
    const auto rep = scenario::run_reduction(3, 300);
    CHECK(rep.max_abs_diff <= 1e-10);
    CHECK(rep.scalar_counts_ok);
    CHECK(rep.post_groups == 3);
    CHECK(rep.pre_groups == 2);
    CHECK(rep.reduced_scalars < rep.oracle_scalars);
}

TEST_CASE("merged and unmerged runs agree")
{
    const auto rep = scenario::run_merge(3, 5, 100);
    CHECK(rep.merged_scalars == rep.post_size);
    CHECK(rep.unmerged_scalars == 3 * rep.post_size);
    CHECK(rep.spikes > 0);
    CHECK(rep.rasters_equal);
    CHECK(rep.max_v_diff <= 1e-10);
}
