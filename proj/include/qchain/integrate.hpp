#pragma once

#include "qchain/model.hpp"

#include <functional>
#include <stdexcept>
#include <utility>

namespace qchain {

enum class StepMethod { FixedRK4, AdaptiveRK45 };

std::string to_string(StepMethod method);

struct IntegratorConfig {
    StepMethod method = StepMethod::FixedRK4;
    double dt = 1e-2;        // fixed-step size
    double rel_tol = 1e-9;   // adaptive scheme only
    double abs_tol = 1e-11;  // adaptive scheme only
    double max_step = 1.0;   // adaptive scheme only
};

// Thrown on step-size underflow or a non-finite state (stiffness / blow-up).
struct IntegrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Read-only view of packed coordinates handed to observers; avoids a
// ChainState copy on every accepted step.
class StateView {
public:
    StateView(const double* y, int n) : y_(y), n_(n) {}
    int n() const { return n_; }
    double w(int j) const { return y_[j]; }
    double u(int j) const { return y_[n_ + j]; }
    double v(int j) const { return y_[2 * n_ + j]; }
    ChainState to_state() const;

private:
    const double* y_;
    int n_;
};

using Observer = std::function<void(double tau, const StateView& state)>;

struct StepResult {
    ChainState state;
    double tau;
};

// One accepted step of the chosen scheme starting at tau.
StepResult step(const ChainState& state, const ModelParams& params, double tau,
                const IntegratorConfig& config);

// Advances state over tau_span, invoking the observer at tau_span.first and
// after every accepted step. Fixed-step trajectories are bitwise
// reproducible for identical inputs.
ChainState integrate(const ChainState& state, const ModelParams& params,
                     std::pair<double, double> tau_span, const IntegratorConfig& config,
                     const Observer& observer = {});

// State plus K tangent (perturbation) vectors propagated under the exact
// Jacobian linearization along the same trajectory.
struct TangentBundle {
    ChainState base;
    Eigen::MatrixXd vectors;  // 3N x K, K >= 1
};

TangentBundle integrate_with_tangents(const TangentBundle& bundle, const ModelParams& params,
                                      std::pair<double, double> tau_span,
                                      const IntegratorConfig& config);

// Reusable stepping engine: owns the stage buffers so repeated intervals
// (e.g. between Lyapunov renormalizations) do not reallocate. The combined
// system is column 0 = base state, columns 1..K = tangent vectors.
class Propagator {
public:
    Propagator(const ModelParams& params, const IntegratorConfig& config, int n_tangents);

    int dim() const { return field_.dim(); }
    int n_tangents() const { return k_; }

    // Advances z in place from tau over `interval` (>= 0); returns the end
    // time. The observer, when set, sees the base column at tau and after
    // every accepted step.
    double advance(double tau, double interval, Eigen::MatrixXd& z,
                   const Observer& observer = {});

    // One adaptive trial step of size h from tau. On acceptance advances tau
    // and z; updates h with the error controller either way.
    bool try_rk45_step(double& tau, double& h, Eigen::MatrixXd& z);

private:
    void eval(double tau, const Eigen::MatrixXd& z, Eigen::MatrixXd& dz);
    void rk4_step(double tau, double dt, Eigen::MatrixXd& z);
    // Trial RK45 step; candidate lands in cand_, returns the scaled error.
    double rk45_error(double tau, double dt, const Eigen::MatrixXd& z);

    VectorField field_;
    IntegratorConfig config_;
    int k_;
    Eigen::MatrixXd stage_[7];
    Eigen::MatrixXd work_, errbuf_, cand_;
};

}  // namespace qchain
