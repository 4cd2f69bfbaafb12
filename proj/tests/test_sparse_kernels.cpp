#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gen.hpp"
#include "oracles.hpp"
#include "spikekern/csr_io.hpp"
#include "spikekern/sparse_kernels.hpp"

using namespace spikekern;

namespace {

std::vector<double> to_d(const std::vector<Real>& v) { return {v.begin(), v.end()}; }

void check_close(const std::vector<Real>& got, const std::vector<double>& want, const std::vector<double>& scale,
                 double rel)
{
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(std::abs(got[i] - want[i]) <= rel * std::max(std::abs(want[i]), scale[i]));
}

}  // namespace

TEST_CASE("csr constructor rejects broken invariants")
{
    CHECK_NOTHROW(CsrMatrix(2, 3, {0, 1, 2}, {0, 2}, HomogeneousWeight{1}));
    CHECK_THROWS_AS(CsrMatrix(2, 3, {1, 1, 2}, {0, 2}, HomogeneousWeight{1}), ValidationError);
    CHECK_THROWS_AS(CsrMatrix(2, 3, {0, 2, 1}, {0, 2}, HomogeneousWeight{1}), ValidationError);
    CHECK_THROWS_AS(CsrMatrix(2, 3, {0, 1, 2}, {0, 3}, HomogeneousWeight{1}), ValidationError);
    CHECK_THROWS_AS(CsrMatrix(1, 3, {0, 2}, {2, 1}, HomogeneousWeight{1}), ValidationError);
    CHECK_THROWS_AS(CsrMatrix(1, 3, {0, 2}, {1, 1}, HomogeneousWeight{1}), ValidationError);
    CHECK_THROWS_AS(CsrMatrix(1, 3, {0, 2}, {0, 1}, std::vector<Real>{1.0}), ValidationError);
    CHECK_THROWS_AS(CsrMatrix(2, 3, {0, 1}, {0}, HomogeneousWeight{1}), ValidationError);
}

TEST_CASE("from_edges sorts and merges duplicates")
{
    const auto m = CsrMatrix::from_edges(2, 3, {{1, 2, 1.0}, {0, 1, 2.0}, {1, 0, 0.5}, {1, 2, 3.0}});
    CHECK(m.nnz() == 3);
    CHECK(std::vector<Index>(m.indptr().begin(), m.indptr().end()) == std::vector<Index>{0, 1, 3});
    CHECK(std::vector<Index>(m.indices().begin(), m.indices().end()) == std::vector<Index>{1, 0, 2});
    CHECK(m.weight_at(2) == 4.0);

    const auto h = CsrMatrix::from_edges(2, 2, {{1, 1}, {0, 0}, {1, 1}}, 2.0);
    CHECK(h.is_homogeneous());
    CHECK(h.nnz() == 2);
    CHECK_THROWS_AS(CsrMatrix::from_edges(2, 2, {{2, 0, 1.0}}), ValidationError);
}

TEST_CASE("dense_matvec examples")
{
    const auto id = DenseMatrix::identity(3);
    const std::vector<Real> v{1, 2, 3};
    CHECK(dense_matvec(id, v) == v);
    CHECK(dense_matvec(DenseMatrix(4, 3), v) == std::vector<Real>(4, 0));
    CHECK_THROWS_AS(dense_matvec(DenseMatrix(2, 2), v), DimensionError);

    gen::Rng rng(11);
    DenseMatrix m(5, 4);
    oracle::Matrix om = oracle::zeros(5, 4);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 4; ++j) om[i][j] = m(i, j) = gen::real_in(rng, -3, 3);
    const auto x = gen::reals(rng, 4);
    for (bool t : {false, true}) {
        const auto xin = t ? gen::reals(rng, 5) : x;
        check_close(dense_matvec(m, xin, t), oracle::matvec(om, xin, t), oracle::abs_scale(om, xin, t), 1e-14);
    }
}

TEST_CASE("csrmv examples")
{
    const CsrMatrix empty(3, 2, {0, 0, 0, 0}, {}, HomogeneousWeight{1});
    CHECK(csrmv(empty, std::vector<Real>{1, 1}, false) == std::vector<Real>(3, 0));
    CHECK(csrmv(empty, std::vector<Real>{1, 1, 1}, true) == std::vector<Real>(2, 0));

    const auto id = CsrMatrix::from_edges(3, 3, {{0, 0}, {1, 1}, {2, 2}}, 2.5);
    CHECK(csrmv(id, std::vector<Real>{1, 0, 4}, false) == std::vector<Real>{2.5, 0, 10});
    CHECK_THROWS_AS(csrmv(id, std::vector<Real>{1, 0}, false), DimensionError);
}

TEST_CASE("csrmv matches the dense oracle on 200 random instances")
{
    gen::Rng rng(2024);
    for (int it = 0; it < 200; ++it) {
        const auto m = gen::csr(rng, 64, it % 2 == 0);
        const auto d = oracle::dense_of(m);
        for (bool t : {false, true}) {
            const auto v = gen::reals(rng, t ? m.n_rows() : m.n_cols(), -5, 5);
            check_close(csrmv(m, v, t), oracle::matvec(d, v, t), oracle::abs_scale(d, v, t), 1e-12);
        }
    }
}

TEST_CASE("event_csrmv with no events reads no weights")
{
    gen::Rng rng(5);
    const auto m = gen::csr(rng, 40, false);
    for (bool t : {false, true}) {
        KernelStats stats;
        const auto y = event_csrmv(m, SpikeVector(t ? m.n_rows() : m.n_cols()), t, {}, &stats);
        CHECK(y == std::vector<Real>(y.size(), 0));
        CHECK(stats.weight_reads == 0);
    }
}

TEST_CASE("event_csrmv with a single event returns one row or column")
{
    gen::Rng rng(6);
    const auto m = gen::csr(rng, 30, false);
    const auto d = oracle::dense_of(m);
    const Index k = m.n_rows() / 2;
    const auto row = event_csrmv(m, SpikeVector::from_indices(m.n_rows(), std::vector<Index>{k}), true);
    CHECK(to_d(row) == d[k]);
    const Index c = m.n_cols() / 2;
    const auto col = event_csrmv(m, SpikeVector::from_indices(m.n_cols(), std::vector<Index>{c}), false);
    for (std::size_t i = 0; i < m.n_rows(); ++i) CHECK(col[i] == d[i][c]);
}

TEST_CASE("event_csrmv gather reads only weights of active columns")
{
    gen::Rng rng(8);
    const auto m = gen::csr(rng, 50, false);
    const auto ev = gen::spikes(rng, m.n_cols(), 0.2);
    std::uint64_t expect = 0;
    for (Index idx : m.indices()) expect += ev[idx] ? 1 : 0;
    KernelStats stats;
    event_csrmv(m, ev, false, {}, &stats);
    CHECK(stats.weight_reads == expect);

    const auto rows = gen::spikes(rng, m.n_rows(), 0.2);
    std::uint64_t scatter_expect = 0;
    for (Index i = 0; i < m.n_rows(); ++i)
        if (rows[i]) scatter_expect += m.indptr()[i + 1] - m.indptr()[i];
    KernelStats s2;
    event_csrmv(m, rows, true, {}, &s2);
    CHECK(s2.weight_reads == scatter_expect);
}

TEST_CASE("event_csrmv equals csrmv and the dense oracle on random patterns")
{
    gen::Rng rng(77);
    const double densities[] = {0.001, 0.01, 0.1};
    for (int it = 0; it < 300; ++it) {
        const bool homo = it % 2 == 0;
        const auto m = gen::csr(rng, 64, homo);
        const auto d = oracle::dense_of(m);
        for (bool t : {false, true}) {
            const auto ev = gen::spikes(rng, t ? m.n_rows() : m.n_cols(), densities[it % 3] * 10);
            const auto v = ev.as_real();
            const auto y = event_csrmv(m, ev, t);
            const auto want = oracle::matvec(d, to_d(v), t);
            if (homo) {
                CHECK(to_d(y) == want);
                CHECK(y == csrmv(m, v, t));
            } else {
                check_close(y, want, oracle::abs_scale(d, to_d(v), t), 1e-12);
                check_close(y, to_d(csrmv(m, v, t)), oracle::abs_scale(d, to_d(v), t), 1e-12);
            }
        }
    }
}

TEST_CASE("parallel kernels agree with sequential ones")
{
    gen::Rng rng(99);
    for (int it = 0; it < 20; ++it) {
        const auto m = gen::csr(rng, 64, it % 2 == 0);
        const auto d = oracle::dense_of(m);
        for (bool t : {false, true}) {
            const auto ev = gen::spikes(rng, t ? m.n_rows() : m.n_cols(), 0.3);
            const auto v = ev.as_real();
            const auto scale = oracle::abs_scale(d, to_d(v), t);
            check_close(event_csrmv(m, ev, t, Exec{3}), to_d(event_csrmv(m, ev, t)), scale, 1e-12);
            check_close(csrmv(m, v, t, Exec{4}), to_d(csrmv(m, v, t)), scale, 1e-12);
        }
    }
}

TEST_CASE("transposed CSR densifies to the transposed dense matrix")
{
    gen::Rng rng(3);
    for (int it = 0; it < 30; ++it) {
        const auto m = gen::csr(rng, 40, it % 2 == 1);
        CHECK(m.densify().transposed() == m.transposed().densify());
        CHECK(m.transposed().transposed() == m);
    }
}

TEST_CASE("weight gradient examples")
{
    gen::Rng rng(4);
    const auto m = gen::csr(rng, 20, false);
    const auto g = event_csrmv_weight_grad(m, SpikeVector(m.n_rows()), gen::reals(rng, m.n_cols()), true);
    for (Real x : std::get<std::vector<Real>>(g)) CHECK(x == 0);

    const auto id = CsrMatrix::from_edges(2, 2, {{0, 0}, {1, 1}}, 0.7);
    const std::vector<Real> ct{1.25, -3.5};
    const auto both = SpikeVector::from_indices(2, std::vector<Index>{0, 1});
    CHECK(std::get<Real>(event_csrmv_weight_grad(id, both, ct, true)) == doctest::Approx(1.25 - 3.5));
    CHECK_THROWS_AS(event_csrmv_weight_grad(id, both, std::vector<Real>{1}, true), DimensionError);
}

TEST_CASE("weight gradient matches central finite differences")
{
    gen::Rng rng(1234);
    const double h = 1e-6;
    for (int it = 0; it < 100; ++it) {
        const bool homo = it % 2 == 0;
        const bool t = it % 3 != 0;
        const auto m = gen::csr(rng, 24, homo);
        if (m.nnz() == 0) continue;
        const auto ev = gen::spikes(rng, t ? m.n_rows() : m.n_cols(), 0.5);
        const auto ct = gen::reals(rng, t ? m.n_cols() : m.n_rows());
        auto loss = [&](const CsrMatrix& mm) {
            const auto y = event_csrmv(mm, ev, t);
            double s = 0;
            for (std::size_t i = 0; i < y.size(); ++i) s += ct[i] * y[i];
            return s;
        };
        auto with = [&](CsrWeights w) {
            return CsrMatrix(m.n_rows(), m.n_cols(), {m.indptr().begin(), m.indptr().end()},
                             {m.indices().begin(), m.indices().end()}, std::move(w));
        };
        const auto grad = event_csrmv_weight_grad(m, ev, ct, t);
        if (homo) {
            const Real w = m.homogeneous_weight();
            const double fd = (loss(with(HomogeneousWeight{w + h})) - loss(with(HomogeneousWeight{w - h}))) / (2 * h);
            const double g = std::get<Real>(grad);
            CHECK(std::abs(g - fd) <= 1e-5 * std::max(1.0, std::abs(g)));
        } else {
            const auto& g = std::get<std::vector<Real>>(grad);
            std::vector<Real> w(m.edge_weights().begin(), m.edge_weights().end());
            for (std::size_t e = 0; e < w.size(); ++e) {
                auto up = w, dn = w;
                up[e] += h;
                dn[e] -= h;
                const double fd = (loss(with(up)) - loss(with(dn))) / (2 * h);
                CHECK(std::abs(g[e] - fd) <= 1e-5 * std::max(1.0, std::abs(g[e])));
            }
        }
    }
}

TEST_CASE("CSR binary format round trips and is little-endian")
{
    gen::Rng rng(21);
    for (bool homo : {true, false}) {
        const auto m = gen::csr(rng, 30, homo);
        std::stringstream ss;
        write_csr(ss, m);
        const std::string bytes = ss.str();
        CHECK(bytes.substr(0, 8) == std::string("SPKCSR1\0", 8));
        CHECK(static_cast<unsigned char>(bytes[8]) == (m.n_rows() & 0xff));
        CHECK(static_cast<unsigned char>(bytes[12]) == (m.n_cols() & 0xff));
        const std::size_t tag_at = 16 + 4 * (m.n_rows() + 1) + 4 * m.nnz();
        CHECK(static_cast<int>(bytes[tag_at]) == (homo ? 0 : 1));
        CHECK(bytes.size() == tag_at + 1 + 8 * (homo ? 1 : m.nnz()));
        CHECK(read_csr(ss) == m);

        std::stringstream cut(bytes.substr(0, bytes.size() - 3));
        CHECK_THROWS_AS(read_csr(cut), ValidationError);
    }
    std::stringstream bad("NOTACSR!xxxxxxxx");
    CHECK_THROWS_AS(read_csr(bad), ValidationError);
}

TEST_CASE("edge list loader")
{
    std::stringstream plain("# header\n0 1\n2 0  # trailing comment\n\n0 1\n");
    const auto m = read_edge_list(plain);
    CHECK(m.is_homogeneous());
    CHECK(m.n_rows() == 3);
    CHECK(m.n_cols() == 2);
    CHECK(m.nnz() == 2);

    std::stringstream weighted("0 0 0.5\n0 0 0.25\n1 2 -1\n");
    const auto w = read_edge_list(weighted, Shape{4, 4});
    CHECK(w.n_rows() == 4);
    CHECK(w.weight_at(0) == 0.75);

    std::stringstream mixed("0 0 1.0\n1 1\n");
    CHECK_THROWS_AS(read_edge_list(mixed), ValidationError);
    std::stringstream junk("0 x\n");
    CHECK_THROWS_AS(read_edge_list(junk), ValidationError);
    std::stringstream out_of_shape("5 0\n");
    CHECK_THROWS_AS(read_edge_list(out_of_shape, Shape{2, 2}), ValidationError);
}
