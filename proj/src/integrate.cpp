#include "qchain/integrate.hpp"

#include <cmath>

namespace qchain {

std::string to_string(StepMethod method) {
    return method == StepMethod::FixedRK4 ? "rk4" : "rk45";
}

ChainState StateView::to_state() const {
    return ChainState(Eigen::Map<const Eigen::VectorXd>(y_, n_),
                      Eigen::Map<const Eigen::VectorXd>(y_ + n_, n_),
                      Eigen::Map<const Eigen::VectorXd>(y_ + 2 * n_, n_));
}

Propagator::Propagator(const ModelParams& params, const IntegratorConfig& config, int n_tangents)
    : field_(params), config_(config), k_(n_tangents) {
    if (k_ < 0) throw std::invalid_argument("integrate: n_tangents must be >= 0");
    if (config.dt <= 0.0) throw std::invalid_argument("integrate: dt must be > 0");
    if (config.rel_tol <= 0.0 || config.abs_tol <= 0.0)
        throw std::invalid_argument("integrate: tolerances must be > 0");
    int cols = 1 + k_;
    for (auto& s : stage_) s.resize(field_.dim(), cols);
    work_.resize(field_.dim(), cols);
    errbuf_.resize(field_.dim(), cols);
    cand_.resize(field_.dim(), cols);
}

void Propagator::eval(double tau, const Eigen::MatrixXd& z, Eigen::MatrixXd& dz) {
    if (k_ == 0)
        field_.eval(tau, z.data(), dz.data());
    else
        field_.eval_with_tangents(tau, z.data(), z.data() + field_.dim(), dz.data(),
                                  dz.data() + field_.dim(), k_);
}

void Propagator::rk4_step(double tau, double dt, Eigen::MatrixXd& z) {
    eval(tau, z, stage_[0]);
    work_ = z + (0.5 * dt) * stage_[0];
    eval(tau + 0.5 * dt, work_, stage_[1]);
    work_ = z + (0.5 * dt) * stage_[1];
    eval(tau + 0.5 * dt, work_, stage_[2]);
    work_ = z + dt * stage_[2];
    eval(tau + dt, work_, stage_[3]);
    z += (dt / 6.0) * (stage_[0] + 2.0 * stage_[1] + 2.0 * stage_[2] + stage_[3]);
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kB5[7] = {35.0 / 384,     0.0,       500.0 / 1113, 125.0 / 192,
                           -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr double kB4[7] = {5179.0 / 57600,  0.0,        7571.0 / 16695, 393.0 / 640,
                           -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

}  // namespace

double Propagator::rk45_error(double tau, double dt, const Eigen::MatrixXd& z) {
    eval(tau, z, stage_[0]);
    for (int s = 1; s < 7; ++s) {
        work_ = z;
        for (int i = 0; i < s; ++i)
            if (kA[s][i] != 0.0) work_ += (dt * kA[s][i]) * stage_[i];
        if (s == 6) cand_ = work_;  // stage 7 sits at the 5th-order solution
        eval(tau + kC[s] * dt, work_, stage_[s]);
    }
    errbuf_.setZero();
    for (int s = 0; s < 7; ++s) {
        double e = kB5[s] - kB4[s];
        if (e != 0.0) errbuf_ += (dt * e) * stage_[s];
    }
    double sum = 0.0;
    const double* err = errbuf_.data();
    const double* y0 = z.data();
    const double* y1 = cand_.data();
    const Eigen::Index count = z.size();
    for (Eigen::Index i = 0; i < count; ++i) {
        double scale = config_.abs_tol +
                       config_.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        double r = err[i] / scale;
        sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(count));
}

bool Propagator::try_rk45_step(double& tau, double& h, Eigen::MatrixXd& z) {
    double err = rk45_error(tau, h, z);
    bool accepted = err <= 1.0;
    if (accepted) {
        z.swap(cand_);
        tau += h;
    }
    double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    h *= std::clamp(factor, 0.2, 5.0);
    h = std::min(h, config_.max_step);
    return accepted;
}

double Propagator::advance(double tau, double interval, Eigen::MatrixXd& z,
                           const Observer& observer) {
    if (interval < 0.0) throw std::invalid_argument("integrate: negative interval");
    const int n = field_.n();
    if (observer) observer(tau, StateView(z.data(), n));
    if (interval == 0.0) return tau;
    const double tau_end = tau + interval;

    if (config_.method == StepMethod::FixedRK4) {
        const double dt = config_.dt;
        // Whole steps at exactly dt, then one shorter step onto tau_end if
        // the interval is not a multiple of dt.
        auto n_whole = static_cast<long long>(std::floor(interval / dt + 1e-9));
        for (long long i = 0; i < n_whole; ++i) {
            rk4_step(tau + static_cast<double>(i) * dt, dt, z);
            if (observer) observer(tau + static_cast<double>(i + 1) * dt, StateView(z.data(), n));
        }
        double done = tau + static_cast<double>(n_whole) * dt;
        if (tau_end - done > 1e-12 * std::max(1.0, std::abs(tau_end))) {
            rk4_step(done, tau_end - done, z);
            if (observer) observer(tau_end, StateView(z.data(), n));
        }
        if (!z.allFinite())
            throw IntegrationError("trajectory blow-up: non-finite state at tau = " +
                                   std::to_string(tau_end));
        return tau_end;
    }

    double t = tau;
    double h = std::min({config_.dt, config_.max_step, interval});
    const double tiny = 1e-14 * std::max(1.0, std::abs(tau_end));
    while (tau_end - t > tiny) {
        h = std::min(h, tau_end - t);
        if (h < tiny)
            throw IntegrationError("step-size underflow at tau = " + std::to_string(t));
        if (try_rk45_step(t, h, z)) {
            if (!z.allFinite())
                throw IntegrationError("trajectory blow-up: non-finite state at tau = " +
                                       std::to_string(t));
            if (observer) observer(t, StateView(z.data(), n));
        }
    }
    return tau_end;
}

StepResult step(const ChainState& state, const ModelParams& params, double tau,
                const IntegratorConfig& config) {
    if (!std::isfinite(tau)) throw std::invalid_argument("step: tau must be finite");
    Propagator prop(params, config, 0);
    Eigen::MatrixXd z = state.packed();
    if (config.method == StepMethod::FixedRK4) {
        double end = prop.advance(tau, config.dt, z);
        return {ChainState::from_packed(z.col(0)), end};
    }
    double t = tau;
    double h = std::min(config.dt, config.max_step);
    while (true) {
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
            throw IntegrationError("step-size underflow at tau = " + std::to_string(t));
        if (prop.try_rk45_step(t, h, z)) {
            if (!z.allFinite()) throw IntegrationError("non-finite state after step");
            return {ChainState::from_packed(z.col(0)), t};
        }
    }
}

ChainState integrate(const ChainState& state, const ModelParams& params,
                     std::pair<double, double> tau_span, const IntegratorConfig& config,
                     const Observer& observer) {
    if (tau_span.second < tau_span.first)
        throw std::invalid_argument("integrate: tau_span must satisfy tau1 >= tau0");
    auto violations = validate_state(state);
    if (!violations.empty())
        throw std::invalid_argument("integrate: invalid initial state: " + violations.front());
    Propagator prop(params, config, 0);
    Eigen::MatrixXd z = state.packed();
    prop.advance(tau_span.first, tau_span.second - tau_span.first, z, observer);
    return ChainState::from_packed(z.col(0));
}

TangentBundle integrate_with_tangents(const TangentBundle& bundle, const ModelParams& params,
                                      std::pair<double, double> tau_span,
                                      const IntegratorConfig& config) {
    if (tau_span.second < tau_span.first)
        throw std::invalid_argument("integrate: tau_span must satisfy tau1 >= tau0");
    const int dim = 3 * bundle.base.n();
    const int k = static_cast<int>(bundle.vectors.cols());
    if (k < 1 || bundle.vectors.rows() != dim)
        throw std::invalid_argument("integrate: tangent bundle must hold K >= 1 vectors of dimension 3N");
    if (!bundle.vectors.allFinite())
        throw std::invalid_argument("integrate: tangent vectors must be finite");
    Propagator prop(params, config, k);
    Eigen::MatrixXd z(dim, 1 + k);
    z.col(0) = bundle.base.packed();
    z.rightCols(k) = bundle.vectors;
    prop.advance(tau_span.first, tau_span.second - tau_span.first, z);
    return {ChainState::from_packed(z.col(0)), z.rightCols(k)};
}

}  // namespace qchain
