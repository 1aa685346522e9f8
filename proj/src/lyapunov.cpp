#include "qchain/lyapunov.hpp"

#include "qchain/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qchain {

std::string Regime::label() const {
    switch (kind) {
        case RegimeKind::FixedPoint: return "fixed_point";
        case RegimeKind::Periodic: return "periodic";
        case RegimeKind::Quasiperiodic: return "quasiperiodic";
        case RegimeKind::Chaos: return "chaos";
        case RegimeKind::Hyperchaos: return "hyperchaos(" + std::to_string(positive_count) + ")";
    }
    return "?";
}

Eigen::MatrixXd random_orthonormal(int dim, int k, std::uint64_t seed) {
    if (k < 1 || k > dim) throw std::invalid_argument("lyapunov: need 1 <= K <= 3N");
    SplitMix64 rng(seed);
    Eigen::MatrixXd g(dim, k);
    for (int col = 0; col < k; ++col)
        for (int row = 0; row < dim; ++row) g(row, col) = rng.next_normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, k);
    return q;
}

GramSchmidtResult gram_schmidt(const Eigen::MatrixXd& vectors, double tol,
                               std::uint64_t reseed) {
    const int dim = static_cast<int>(vectors.rows());
    const int k = static_cast<int>(vectors.cols());
    if (k < 1 || k > dim) throw std::invalid_argument("gram_schmidt: need 1 <= K <= dim");
    GramSchmidtResult result;
    result.q = vectors;
    result.norms.resize(k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < i; ++j)
            result.q.col(i) -= result.q.col(j).dot(result.q.col(i)) * result.q.col(j);
        double norm = result.q.col(i).norm();
        result.norms[i] = norm;
        if (norm < tol) {
            // Rank deficiency: replace by a fresh random direction orthogonal
            // to the accepted columns. The logged norm keeps the degenerate
            // residual so the exponent accumulation stays honest.
            result.degenerate.push_back(i);
            SplitMix64 rng(reseed + static_cast<std::uint64_t>(i));
            double rnorm = 0.0;
            do {
                for (int row = 0; row < dim; ++row) result.q(row, i) = rng.next_normal();
                for (int j = 0; j < i; ++j)
                    result.q.col(i) -= result.q.col(j).dot(result.q.col(i)) * result.q.col(j);
                rnorm = result.q.col(i).norm();
            } while (rnorm < tol);
            result.q.col(i) /= rnorm;
        } else {
            result.q.col(i) /= norm;
        }
    }
    return result;
}

int count_positive(const Eigen::VectorXd& spectrum, double zero_tol) {
    int count = 0;
    for (Eigen::Index i = 0; i < spectrum.size(); ++i)
        if (spectrum[i] > zero_tol) ++count;
    return count;
}

Regime classify_regime(const Eigen::VectorXd& spectrum, double zero_tol, bool autonomous) {
    if (spectrum.size() < 1) throw std::invalid_argument("classify_regime: empty spectrum");
    int positives = 0, zeros = 0;
    bool uncertain = false;
    for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
        double lambda = spectrum[i];
        if (lambda > zero_tol)
            ++positives;
        else if (lambda >= -zero_tol)
            ++zeros;
        // Values straddling a band edge make the label ambiguous.
        double edge_dist = std::min(std::abs(lambda - zero_tol), std::abs(lambda + zero_tol));
        if (edge_dist < 0.5 * zero_tol) uncertain = true;
    }
    Regime regime;
    regime.uncertain = uncertain;
    if (positives >= 2) {
        regime.kind = RegimeKind::Hyperchaos;
        regime.positive_count = positives;
    } else if (positives == 1) {
        regime.kind = RegimeKind::Chaos;
        regime.positive_count = 1;
    } else if (autonomous) {
        regime.kind = zeros == 0   ? RegimeKind::FixedPoint
                      : zeros == 1 ? RegimeKind::Periodic
                                   : RegimeKind::Quasiperiodic;
    } else {
        // Conditional spectrum: the forced zero along the flow is absent, so
        // an entrained periodic orbit has all exponents negative.
        regime.kind = zeros == 0 ? RegimeKind::Periodic : RegimeKind::Quasiperiodic;
    }
    return regime;
}

LyapunovResult lyapunov_spectrum(const ModelParams& params, const ChainState& initial,
                                 const LyapunovConfig& config,
                                 const IntegratorConfig& integrator, const Observer& observer) {
    const int dim = 3 * params.n();
    int k = config.n_exponents == 0 ? dim : config.n_exponents;
    if (k < 1 || k > dim)
        throw std::invalid_argument("lyapunov: n_exponents must satisfy 1 <= K <= 3N");
    if (config.transient < 0 || config.averaging_time <= 0 || config.renorm_interval <= 0 ||
        config.zero_tol <= 0)
        throw std::invalid_argument("lyapunov: times and zero_tol must be positive");
    auto violations = validate_state(initial);
    if (!violations.empty())
        throw std::invalid_argument("lyapunov: invalid initial state: " + violations.front());
    if (initial.n() != params.n())
        throw std::invalid_argument("lyapunov: state size does not match topology");

    const long long n_renorms =
        std::max<long long>(1, llround(config.averaging_time / config.renorm_interval));
    const double t_total = static_cast<double>(n_renorms) * config.renorm_interval;

    // Transient: base state only.
    Propagator base_prop(params, integrator, 0);
    Eigen::MatrixXd y = initial.packed();
    double tau = base_prop.advance(0.0, config.transient, y);

    // Averaging phase: base plus K tangent vectors.
    Propagator prop(params, integrator, k);
    Eigen::MatrixXd z(dim, 1 + k);
    z.col(0) = y.col(0);
    z.rightCols(k) = random_orthonormal(dim, k, config.tangent_seed);

    LyapunovResult result;
    Eigen::VectorXd log_sums = Eigen::VectorXd::Zero(k);
    std::vector<double> running_lead;
    running_lead.reserve(static_cast<size_t>(n_renorms));
    const long long stride = std::max<long long>(1, n_renorms / std::max(1, config.history_max));

    for (long long i = 1; i <= n_renorms; ++i) {
        tau = prop.advance(tau, config.renorm_interval, z, observer);
        if (!z.allFinite())
            throw IntegrationError("lyapunov: trajectory blow-up at tau = " + std::to_string(tau));
        Eigen::MatrixXd vectors = z.rightCols(k);
        GramSchmidtResult gs = gram_schmidt(vectors);
        z.rightCols(k) = gs.q;
        for (int col = 0; col < k; ++col) log_sums[col] += std::log(gs.norms[col]);
        for (int col : gs.degenerate) {
            (void)col;
            result.degenerate_events.push_back(i);
        }
        double elapsed = static_cast<double>(i) * config.renorm_interval;
        running_lead.push_back(log_sums[0] / elapsed);
        if (i % stride == 0 || i == n_renorms)
            result.history.emplace_back(elapsed, (log_sums / elapsed).eval());
    }

    Eigen::VectorXd exponents = log_sums / t_total;
    std::sort(exponents.data(), exponents.data() + exponents.size(), std::greater<double>());
    result.exponents = exponents;
    result.final_state = ChainState::from_packed(z.col(0));

    // Last-quarter drift of the leading running estimate.
    double final_lead = running_lead.back();
    double drift = 0.0;
    size_t start = running_lead.size() - running_lead.size() / 4;
    if (start >= running_lead.size()) start = running_lead.size() - 1;
    for (size_t i = start; i < running_lead.size(); ++i)
        drift = std::max(drift, std::abs(running_lead[i] - final_lead));
    result.drift = drift;
    result.converged = drift <= 2.0 * config.zero_tol;
    result.classification = classify_regime(exponents, config.zero_tol, !config.conditional);
    return result;
}

}  // namespace qchain
