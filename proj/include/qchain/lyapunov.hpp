#pragma once

#include "qchain/integrate.hpp"

#include <optional>

namespace qchain {

struct LyapunovConfig {
    int n_exponents = 0;            // K <= 3N; 0 means the full 3N spectrum
    double transient = 5000.0;      // discarded before averaging
    double averaging_time = 20000.0;
    double renorm_interval = 1.0;   // Gram-Schmidt period
    double zero_tol = 5e-3;         // half-width of the "zero exponent" band
    // Conditional exponents (externally driven system, time treated as an
    // external parameter). Set true when the drive is modulated.
    bool conditional = false;
    std::uint64_t tangent_seed = 1;  // initial orthonormal tangent basis
    int history_max = 2000;          // cap on stored history entries
};

enum class RegimeKind { FixedPoint, Periodic, Quasiperiodic, Chaos, Hyperchaos };

struct Regime {
    RegimeKind kind = RegimeKind::FixedPoint;
    int positive_count = 0;  // m >= 2 for Hyperchaos
    // Set when an exponent sits too close to the zero-band boundary for the
    // label to be trusted.
    bool uncertain = false;

    std::string label() const;  // e.g. "fixed_point", "hyperchaos(2)"
    bool operator==(const Regime& other) const = default;
};

struct LyapunovResult {
    Eigen::VectorXd exponents;  // descending, units of 1/tau
    // Running estimates (tau since averaging began, per-exponent values in
    // Gram-Schmidt order), decimated to at most history_max entries.
    std::vector<std::pair<double, Eigen::VectorXd>> history;
    ChainState final_state;
    Regime classification;
    bool converged = true;  // last-quarter drift of the leading exponent <= 2*zero_tol
    double drift = 0.0;
    // Indices of renormalizations where a tangent vector degenerated and was
    // re-randomized (empty in healthy runs).
    std::vector<long long> degenerate_events;
};

struct GramSchmidtResult {
    Eigen::MatrixXd q;       // orthonormal, spans the same flag as the input
    Eigen::VectorXd norms;   // pre-normalization residual lengths
    std::vector<int> degenerate;  // columns that fell below tolerance and were re-randomized
};

// Modified Gram-Schmidt. Residuals below `tol` are replaced by a seeded
// random direction orthogonal to the previous columns and flagged.
GramSchmidtResult gram_schmidt(const Eigen::MatrixXd& vectors, double tol = 1e-12,
                               std::uint64_t reseed = 0x9d2c5680u);

// Benettin method: repeated tangent propagation over renorm_interval with
// Gram-Schmidt reorthonormalization; exponents are time-averaged log
// residual norms. The observer, when set, sees the base trajectory during
// the averaging phase (transient excluded).
LyapunovResult lyapunov_spectrum(const ModelParams& params, const ChainState& initial,
                                 const LyapunovConfig& config,
                                 const IntegratorConfig& integrator = {},
                                 const Observer& observer = {});

// Counts exponents above +zero_tol.
int count_positive(const Eigen::VectorXd& spectrum, double zero_tol);

// Classification rules on a descending spectrum. Autonomous flows carry a
// zero exponent along the trajectory; conditional spectra of driven systems
// do not, which shifts the rules by one zero.
Regime classify_regime(const Eigen::VectorXd& spectrum, double zero_tol, bool autonomous);

// Orthonormal basis for the initial tangent bundle, deterministic in seed.
Eigen::MatrixXd random_orthonormal(int dim, int k, std::uint64_t seed);

}  // namespace qchain
