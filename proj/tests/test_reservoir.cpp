#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spikekern/reservoir.hpp"

using namespace spikekern;

namespace {

ReservoirParams small_params(std::size_t n = 60)
{
    ReservoirParams p;
    p.n_in = 2;
    p.n_res = n;
    p.n_out = 1;
    p.alpha = Real(0.6);
    p.rho = Real(1.3);
    p.input_scale = Real(0.3);
    p.p_in = 0.5;
    p.p_rec = 0.2;
    p.seed = 21;
    return p;
}

/// Solves A x = b by Gauss-Jordan with partial pivoting in long double.
std::vector<double> solve(std::vector<std::vector<long double>> a, std::vector<long double> b)
{
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const long double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(b[i] / a[i][i]);
    return x;
}

}  // namespace

TEST_CASE("parameters validate and derive sigma")
{
    auto p = small_params();
    CHECK(p.sigma_rec() == doctest::Approx(1.3 / std::sqrt(60 * 0.2)));
    p.alpha = 0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = small_params();
    p.alpha = Real(1.5);
    CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("reservoir step examples")
{
    const auto p = small_params();
    std::vector<Real> x(p.n_res, 0);
    reservoir_step(x, p, std::vector<Real>(2, 0));
    for (Real v : x) CHECK(v == 0);

    const auto win = oracle::jit_dense(p.w_in_spec());
    const auto wrec = oracle::jit_dense(p.w_rec_spec());
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> d(-1, 1);
    for (Real alpha : {Real(1), Real(0.6)}) {
        auto q = p;
        q.alpha = alpha;
        std::vector<Real> xs(q.n_res);
        for (auto& v : xs) v = d(rng);
        const std::vector<Real> u{d(rng), d(rng)};
        auto got = xs;
        reservoir_step(got, q, u);
        for (std::size_t i = 0; i < q.n_res; ++i) {
            long double pre = 0;
            for (std::size_t j = 0; j < 2; ++j) pre += win[i][j] * u[j];
            for (std::size_t j = 0; j < q.n_res; ++j) pre += wrec[i][j] * xs[j];
            const double want = (1 - alpha) * xs[i] + alpha * std::tanh(static_cast<double>(pre));
            CHECK(std::abs(got[i] - want) <= 1e-12 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST_CASE("readout examples")
{
    const std::vector<Real> x{0.5, -1, 2};
    CHECK(readout(x, RMatrix::Zero(2, 3)) == std::vector<Real>{0, 0});
    RMatrix e = RMatrix::Zero(1, 3);
    e(0, 2) = 1;
    CHECK(readout(x, e)[0] == 2);
    RMatrix w(2, 3);
    w << 1, 2, 3, -1, 0.5, 0.25;
    const auto y = readout(x, w);
    CHECK(y[0] == doctest::Approx(0.5 - 2 + 6));
    CHECK(y[1] == doctest::Approx(-0.5 - 0.5 + 0.5));
    CHECK_THROWS_AS(readout(std::vector<Real>(4, 0), w), DimensionError);
}

TEST_CASE("FORCE update closed forms")
{
    auto rls = RlsState::init(3, 1, 0.1);
    std::vector<Real> x{1, 0, 0};
    const auto e = force_update(rls, x, std::vector<Real>{0});
    CHECK(e(0) == 0);
    CHECK(rls.w_out.isZero());

    auto r2 = RlsState::init(3, 1, 0.1);
    const Real target = 2;
    force_update(r2, x, std::vector<Real>{target});
    const double k = (1 / 0.1) / (1 + 1 / 0.1);
    CHECK(r2.w_out(0, 0) == doctest::Approx(target * k).epsilon(1e-14));
    CHECK(r2.w_out(0, 1) == 0);
    CHECK(r2.p(0, 0) == doctest::Approx(10 - 10 * k).epsilon(1e-12));
    CHECK(r2.p(1, 1) == doctest::Approx(10));
    CHECK_THROWS_AS(RlsState::init(3, 1, 0), ValidationError);
}

TEST_CASE("ridge fit examples")
{
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n01;
    RMatrix x(30, 5), y(30, 2);
    for (Index i = 0; i < 30; ++i) {
        for (Index j = 0; j < 5; ++j) x(i, j) = n01(rng);
        y(i, 0) = n01(rng);
        y(i, 1) = n01(rng);
    }
    CHECK(ridge_fit(x, y, 1e12).cwiseAbs().maxCoeff() < 1e-9);

    RMatrix sq = x.topRows(5);
    const RMatrix w = ridge_fit(sq, y.topRows(5), 0);
    CHECK(((sq * w.transpose()) - y.topRows(5)).cwiseAbs().maxCoeff() < 1e-8);

    RMatrix rank_def = RMatrix::Zero(6, 3);
    rank_def.col(0).setOnes();
    rank_def.col(1).setOnes();
    CHECK_THROWS_AS(ridge_fit(rank_def, RMatrix::Ones(6, 1), 0), NumericalError);

    const Real lambda = 0.7;
    const RMatrix wr = ridge_fit(x, y, lambda);
    for (Index o = 0; o < 2; ++o) {
        std::vector<std::vector<long double>> a(5, std::vector<long double>(5, 0));
        std::vector<long double> b(5, 0);
        for (Index i = 0; i < 5; ++i) {
            for (Index j = 0; j < 5; ++j)
                for (Index t = 0; t < 30; ++t) a[i][j] += static_cast<long double>(x(t, i)) * x(t, j);
            a[i][i] += lambda;
            for (Index t = 0; t < 30; ++t) b[i] += static_cast<long double>(x(t, i)) * y(t, o);
        }
        const auto want = solve(a, b);
        for (Index i = 0; i < 5; ++i) CHECK(std::abs(wr(o, i) - want[i]) < 1e-8);
    }
}

TEST_CASE("spectral radius follows the sigma scaling")
{
    ReservoirParams p;
    p.n_res = 400;
    p.p_rec = 0.1;
    p.seed = 5;
    for (Real rho : {Real(0.9), Real(1.3)}) {
        p.rho = rho;
        CHECK(std::abs(empirical_spectral_radius(p) - rho) < 0.15 * rho);
    }
}

TEST_CASE("echo states forget the initial condition")
{
    ReservoirParams p;
    p.n_res = 400;
    p.rho = Real(0.9);
    p.alpha = Real(0.6);
    p.seed = 77;
    Reservoir a(p), b(p);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(-1, 1);
    std::vector<Real> x0(p.n_res);
    for (auto& v : x0) v = d(rng);
    b.set_state(x0);
    auto dist = [&] {
        double s = 0;
        for (std::size_t i = 0; i < p.n_res; ++i) s += std::pow(a.state()[i] - b.state()[i], 2);
        return std::sqrt(s);
    };
    const double d0 = dist();
    for (int t = 0; t < 500; ++t) {
        const std::vector<Real> u{static_cast<Real>(sine_task_signal(t))};
        a.step(u);
        b.step(u);
    }
    CHECK(dist() * 100 <= d0);
}

TEST_CASE("FORCE readout matches the ridge oracle and learns the sine task")
{
    ReservoirParams p;
    p.n_res = 150;
    p.seed = 3;
    TrainOptions o;
    o.train_steps = 2000;
    o.test_steps = 500;
    const auto r = train_reservoir(p, o);
    CHECK(r.nrmse < 0.1);
    CHECK(std::isnan(r.closed_loop_nrmse));
    const RMatrix ridge = ridge_fit(r.states, r.targets, o.force_delta);
    CHECK((r.w_out - ridge).cwiseAbs().maxCoeff() <= 1e-3);

    o.method = ReadoutMethod::Ridge;
    const auto rr = train_reservoir(p, o);
    CHECK(rr.nrmse < 0.1);
    CHECK(rr.test_error.size() == 500);
}

TEST_CASE("memory task and nrmse")
{
    ReservoirParams p;
    p.n_res = 150;
    p.seed = 4;
    TrainOptions o;
    o.task = ReservoirTask::Memory;
    o.method = ReadoutMethod::Ridge;
    o.memory_delay = 3;
    o.train_steps = 1500;
    o.test_steps = 300;
    CHECK(train_reservoir(p, o).nrmse < 0.5);

    const std::vector<double> t{1, 2, 3, 4};
    CHECK(nrmse(t, t) == 0);
    const std::vector<double> mean(4, 2.5);
    CHECK(nrmse(mean, t) == doctest::Approx(1.0));
}
