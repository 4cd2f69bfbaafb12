#include "spikekern/reservoir.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "spikekern/counter_rng.hpp"

namespace spikekern {

void ReservoirParams::validate() const
{
    if (n_in == 0 || n_res == 0 || n_out == 0) throw ValidationError("reservoir sizes must be positive");
    if (!(alpha > 0 && alpha <= 1)) throw ValidationError("reservoir alpha must be in (0, 1]");
    if (!(rho >= 0)) throw ValidationError("reservoir rho must be >= 0");
    if (!(input_scale >= 0)) throw ValidationError("reservoir input_scale must be >= 0");
    if (!(p_in > 0 && p_in <= 1) || !(p_rec > 0 && p_rec <= 1))
        throw ValidationError("reservoir connection probabilities must be in (0, 1]");
}

Real ReservoirParams::sigma_rec() const
{
    return static_cast<Real>(rho / std::sqrt(static_cast<double>(n_res) * p_rec));
}

JitConnSpec ReservoirParams::w_in_spec() const
{
    return {static_cast<Index>(n_res), static_cast<Index>(n_in), p_in, UniformDist{-input_scale, input_scale},
            derive_seed(seed, "reservoir.w_in")};
}

JitConnSpec ReservoirParams::w_rec_spec() const
{
    return {static_cast<Index>(n_res), static_cast<Index>(n_res), p_rec, NormalDist{0, sigma_rec()},
            derive_seed(seed, "reservoir.w_rec")};
}

namespace {

void leaky_update(std::span<Real> x, std::span<const Real> drive, std::span<const Real> rec, Real alpha,
                  Activation act)
{
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Real pre = drive[i] + rec[i];
        const Real f = act == Activation::Tanh ? std::tanh(pre) : pre;
        x[i] = (1 - alpha) * x[i] + alpha * f;
    }
}

}  // namespace

void reservoir_step(std::span<Real> x, const ReservoirParams& params, std::span<const Real> u, Exec exec)
{
    params.validate();
    require_same_size(x.size(), params.n_res, "reservoir state");
    require_same_size(u.size(), params.n_in, "reservoir input");
    const auto drive = jitconn_matvec(params.w_in_spec(), u, false, exec);
    const auto rec = jitconn_matvec(params.w_rec_spec(), x, false, exec);
    leaky_update(x, drive, rec, params.alpha, params.activation);
}

Reservoir::Reservoir(ReservoirParams params, Exec exec)
    : params_(params), exec_(exec), x_(params.n_res, Real{0}), drive_(params.n_res), rec_(params.n_res)
{
    params_.validate();
    w_in_ = params_.w_in_spec();
    w_rec_ = params_.w_rec_spec();
}

void Reservoir::set_state(std::span<const Real> x)
{
    require_same_size(x.size(), x_.size(), "reservoir state");
    std::copy(x.begin(), x.end(), x_.begin());
}

void Reservoir::step(std::span<const Real> u)
{
    require_same_size(u.size(), params_.n_in, "reservoir input");
    jitconn_matvec_into(w_in_, u, false, drive_, exec_);
    jitconn_matvec_into(w_rec_, x_, false, rec_, exec_);
    leaky_update(x_, drive_, rec_, params_.alpha, params_.activation);
}

std::vector<Real> readout(std::span<const Real> x, const RMatrix& w_out)
{
    require_same_size(x.size(), static_cast<std::size_t>(w_out.cols()), "readout state");
    const RVector y = w_out * Eigen::Map<const RVector>(x.data(), static_cast<Eigen::Index>(x.size()));
    return {y.data(), y.data() + y.size()};
}

RlsState RlsState::init(std::size_t n_res, std::size_t n_out, Real delta)
{
    if (!(delta > 0)) throw ValidationError("RLS delta must be > 0");
    const auto n = static_cast<Eigen::Index>(n_res);
    RlsState s{RMatrix::Identity(n, n) / delta, RMatrix::Zero(static_cast<Eigen::Index>(n_out), n)};
    if (Eigen::LLT<RMatrix>(s.p).info() != Eigen::Success)
        throw NumericalError("RLS initial P is not positive definite");
    return s;
}

RVector force_update(RlsState& rls, std::span<const Real> x_in, std::span<const Real> target)
{
    require_same_size(x_in.size(), static_cast<std::size_t>(rls.p.rows()), "FORCE state");
    require_same_size(target.size(), static_cast<std::size_t>(rls.w_out.rows()), "FORCE target");
    const Eigen::Map<const RVector> x(x_in.data(), static_cast<Eigen::Index>(x_in.size()));
    const Eigen::Map<const RVector> y(target.data(), static_cast<Eigen::Index>(target.size()));

    const RVector px = rls.p * x;
    const Real denom = 1 + x.dot(px);
    if (!std::isfinite(denom) || !(denom > 0)) throw NumericalError("FORCE update diverged (x^T P x not finite)");
    const RVector k = px / denom;
    rls.p.noalias() -= k * px.transpose();
    const RVector e = rls.w_out * x - y;
    rls.w_out.noalias() -= e * k.transpose();
    if (!e.allFinite() || !k.allFinite()) throw NumericalError("FORCE update produced non-finite values");
    return e;
}

RMatrix ridge_fit(const RMatrix& states, const RMatrix& targets, Real lambda)
{
    const Eigen::Index t = states.rows();
    const Eigen::Index n = states.cols();
    if (t < 1) throw ValidationError("ridge_fit needs at least one sample");
    if (targets.rows() != t) throw DimensionError("ridge_fit: states and targets differ in sample count");
    if (!(lambda >= 0)) throw ValidationError("ridge lambda must be >= 0");

    RMatrix a(t + n, n);
    a.topRows(t) = states;
    a.bottomRows(n) = RMatrix::Identity(n, n) * std::sqrt(lambda);
    RMatrix b = RMatrix::Zero(t + n, targets.cols());
    b.topRows(t) = targets;

    if (lambda > 0) {
        Eigen::HouseholderQR<RMatrix> qr(a);
        return qr.solve(b).transpose();
    }
    Eigen::ColPivHouseholderQR<RMatrix> qr(a);
    if (qr.rank() < n)
        throw NumericalError("ridge_fit: rank-deficient states with lambda = 0 (rank " + std::to_string(qr.rank()) +
                             " < " + std::to_string(n) + ")");
    return qr.solve(b).transpose();
}

double empirical_spectral_radius(const ReservoirParams& params)
{
    params.validate();
    const DenseMatrix w = materialize(params.w_rec_spec()).densify();
    const auto n = static_cast<Eigen::Index>(w.rows());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = w(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    if (es.info() != Eigen::Success) throw NumericalError("eigenvalue solver failed");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double sine_task_signal(double t)
{
    return (std::sin(0.2 * t) + std::sin(0.311 * t) + std::sin(0.42 * t)) / 3.0;
}

double nrmse(std::span<const double> pred, std::span<const double> target)
{
    require_same_size(pred.size(), target.size(), "nrmse");
    if (target.empty()) throw ValidationError("nrmse of an empty window");
    const double n = static_cast<double>(target.size());
    const double mean = std::accumulate(target.begin(), target.end(), 0.0) / n;
    double var = 0;
    double se = 0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        var += (target[i] - mean) * (target[i] - mean);
        se += (pred[i] - target[i]) * (pred[i] - target[i]);
    }
    if (var == 0) throw NumericalError("nrmse: target has zero variance");
    return std::sqrt(se / var);
}

TrainResult train_reservoir(const ReservoirParams& params, const TrainOptions& opts, Exec exec)
{
    params.validate();
    if (params.n_in != 1 || params.n_out != 1) throw ValidationError("reservoir tasks are scalar: n_in = n_out = 1");
    if (opts.washout >= opts.train_steps) throw ValidationError("washout must be shorter than the training run");
    if (opts.test_steps == 0) throw ValidationError("test window must be non-empty");
    if (opts.task == ReservoirTask::Memory && opts.washout < opts.memory_delay)
        throw ValidationError("washout must cover the memory delay");

    const std::size_t total = opts.train_steps + opts.test_steps;
    std::vector<double> input(total);
    std::vector<double> target(total);
    if (opts.task == ReservoirTask::Sine) {
        for (std::size_t k = 0; k < total; ++k) {
            input[k] = sine_task_signal(static_cast<double>(k) - 1.0);
            target[k] = sine_task_signal(static_cast<double>(k));
        }
    } else {
        RowSampler rng(derive_seed(params.seed, "reservoir.memory"), 0);
        for (auto& u : input) u = rng.uniform(-1.0, 1.0);
        for (std::size_t k = 0; k < total; ++k) target[k] = k >= opts.memory_delay ? input[k - opts.memory_delay] : 0;
    }

    Reservoir res(params, exec);
    const std::size_t n = params.n_res;
    const auto samples = static_cast<Eigen::Index>(opts.train_steps - opts.washout);
    TrainResult out;
    out.states.resize(samples, static_cast<Eigen::Index>(n));
    out.targets.resize(samples, 1);

    RlsState rls;
    if (opts.method == ReadoutMethod::Force) rls = RlsState::init(n, 1, opts.force_delta);

    for (std::size_t k = 0; k < opts.train_steps; ++k) {
        const Real u = static_cast<Real>(input[k]);
        res.step({&u, 1});
        if (k < opts.washout) continue;
        const auto row = static_cast<Eigen::Index>(k - opts.washout);
        const auto x = res.state();
        out.states.row(row) = Eigen::Map<const RVector>(x.data(), static_cast<Eigen::Index>(n)).transpose();
        out.targets(row, 0) = static_cast<Real>(target[k]);
        if (opts.method == ReadoutMethod::Force) {
            const Real y = static_cast<Real>(target[k]);
            const RVector e = force_update(rls, x, {&y, 1});
            out.train_error.push_back(std::abs(static_cast<double>(e(0))));
        }
    }

    if (opts.method == ReadoutMethod::Force) {
        out.w_out = rls.w_out;
    } else {
        out.w_out = ridge_fit(out.states, out.targets, opts.ridge_lambda);
        const RMatrix resid = out.states * out.w_out.transpose() - out.targets;
        for (Eigen::Index i = 0; i < resid.rows(); ++i) out.train_error.push_back(std::abs(resid(i, 0)));
    }

    const std::vector<Real> x_after_train(res.state().begin(), res.state().end());
    std::vector<double> pred;
    std::vector<double> truth;
    for (std::size_t k = opts.train_steps; k < total; ++k) {
        const Real u = static_cast<Real>(input[k]);
        res.step({&u, 1});
        pred.push_back(readout(res.state(), out.w_out)[0]);
        truth.push_back(target[k]);
        out.test_error.push_back(std::abs(pred.back() - truth.back()));
    }
    out.nrmse = nrmse(pred, truth);

    out.closed_loop_nrmse = std::numeric_limits<double>::quiet_NaN();
    if (opts.closed_loop && opts.task == ReservoirTask::Sine) {
        res.set_state(x_after_train);
        Real u = static_cast<Real>(input[opts.train_steps]);
        std::vector<double> gen;
        for (std::size_t k = opts.train_steps; k < total; ++k) {
            res.step({&u, 1});
            u = readout(res.state(), out.w_out)[0];
            gen.push_back(u);
        }
        out.closed_loop_nrmse = nrmse(gen, truth);
    }
    return out;
}

}  // namespace spikekern
