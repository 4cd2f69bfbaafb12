#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spikekern/exec.hpp"
#include "spikekern/jitconn.hpp"

namespace spikekern {

using RMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

enum class Activation { Tanh, Identity };

/// Leaky echo-state reservoir whose input and recurrent matrices are JIT
/// connectivity: W_in ~ Uniform(-s, s) with probability p_in and
/// W_rec ~ Normal(0, rho / sqrt(n_res p_rec)) with probability p_rec.
struct ReservoirParams {
    std::size_t n_in = 1;
    std::size_t n_res = 400;
    std::size_t n_out = 1;
    Real alpha = Real(0.9);
    Real rho = 1;
    Real input_scale = Real(0.1);
    double p_in = 1.0;
    double p_rec = 0.1;
    std::uint64_t seed = 0;
    Activation activation = Activation::Tanh;

    void validate() const;
    Real sigma_rec() const;
    /// n_res x n_in.
    JitConnSpec w_in_spec() const;
    /// n_res x n_res.
    JitConnSpec w_rec_spec() const;
};

/// x <- (1 - alpha) x + alpha f(W_in u + W_rec x)
void reservoir_step(std::span<Real> x, const ReservoirParams& params, std::span<const Real> u, Exec exec = {});

class Reservoir {
public:
    explicit Reservoir(ReservoirParams params, Exec exec = {});

    const ReservoirParams& params() const { return params_; }
    std::span<const Real> state() const { return x_; }
    void set_state(std::span<const Real> x);
    void reset() { std::fill(x_.begin(), x_.end(), Real{0}); }
    void step(std::span<const Real> u);

private:
    ReservoirParams params_;
    JitConnSpec w_in_;
    JitConnSpec w_rec_;
    Exec exec_;
    std::vector<Real> x_;
    std::vector<Real> drive_;
    std::vector<Real> rec_;
};

/// y = W_out x, W_out is n_out x n_res.
std::vector<Real> readout(std::span<const Real> x, const RMatrix& w_out);

/// Recursive least squares readout without forgetting.
struct RlsState {
    RMatrix p;      // n_res x n_res inverse correlation estimate
    RMatrix w_out;  // n_out x n_res

    /// P = I / delta, W_out = 0. Throws NumericalError if P is not positive definite.
    static RlsState init(std::size_t n_res, std::size_t n_out, Real delta = Real(0.1));
};

/// One FORCE step:
///   k = P x / (1 + x^T P x),  P <- P - k (P x)^T,  e = W_out x - target,  W_out <- W_out - e k^T
/// Returns e (before the update). Throws NumericalError on non-finite values.
RVector force_update(RlsState& rls, std::span<const Real> x, std::span<const Real> target);

/// W_out^T = (X^T X + lambda I)^-1 X^T Y, solved by QR on the stacked system
/// [X; sqrt(lambda) I] W = [Y; 0]. states is T x n_res, targets T x n_out.
/// Throws NumericalError when lambda = 0 and X is rank deficient.
RMatrix ridge_fit(const RMatrix& states, const RMatrix& targets, Real lambda);

/// Largest eigenvalue magnitude of the materialized recurrent matrix.
double empirical_spectral_radius(const ReservoirParams& params);

enum class ReservoirTask { Sine, Memory };
enum class ReadoutMethod { Force, Ridge };

struct TrainOptions {
    ReservoirTask task = ReservoirTask::Sine;
    ReadoutMethod method = ReadoutMethod::Force;
    std::size_t train_steps = 4000;
    std::size_t washout = 200;
    std::size_t test_steps = 1000;
    Real ridge_lambda = Real(0.1);
    Real force_delta = Real(0.1);
    std::size_t memory_delay = 10;
    /// Sine task: additionally run the test window feeding predictions back as input.
    bool closed_loop = false;
};

struct TrainResult {
    /// Teacher-forced NRMSE over the test window.
    double nrmse = 0;
    /// Only when TrainOptions::closed_loop is set; NaN otherwise.
    double closed_loop_nrmse = 0;
    RMatrix w_out;
    /// Post-washout states and targets used for training (T x n_res, T x n_out).
    RMatrix states;
    RMatrix targets;
    /// |e| per training step (FORCE: a-priori error, ridge: fitted residual).
    std::vector<double> train_error;
    /// |prediction - target| per test step.
    std::vector<double> test_error;
};

/// Sum of three sinusoids with incommensurate frequencies, in [-1, 1].
double sine_task_signal(double t);

TrainResult train_reservoir(const ReservoirParams& params, const TrainOptions& opts, Exec exec = {});

/// sqrt(mean((pred - target)^2)) / std(target)
double nrmse(std::span<const double> pred, std::span<const double> target);

}  // namespace spikekern
