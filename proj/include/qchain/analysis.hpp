#pragma once

#include "qchain/lyapunov.hpp"

#include <span>

namespace qchain {

// Analytic fixed point of the single-unit (N = 1) driven Bloch equations
// under a constant drive; the coupling sum is empty for one unit.
struct BlochSteadyState {
    double w, u, v;
};
BlochSteadyState steady_state_bloch(double delta, double omega);

// Values of the local maxima of a uniformly sampled series, refined by
// quadratic interpolation through each sample triple. Maxima whose
// prominence (height over the shallower adjacent valley) falls below
// min_prominence are discarded as ripple.
std::vector<double> local_maxima(std::span<const double> series, double min_prominence = 1e-4);

// Streaming variant of local_maxima for long trajectories: feed samples one
// at a time, read `values()` at the end. Keeps at most `max_count` most
// recent maxima.
class MaximaDetector {
public:
    explicit MaximaDetector(double min_prominence = 1e-4, int max_count = 4000);

    void feed(double sample);
    // Maxima confirmed so far, oldest first (capped at max_count).
    std::vector<double> values() const;

private:
    void confirm(double valley);

    double min_prominence_;
    size_t max_count_;
    double prev_ = 0, prev2_ = 0;
    long long seen_ = 0;
    double valley_before_ = 0;  // lowest sample since the previous maximum
    bool have_candidate_ = false;
    double candidate_ = 0;         // refined peak value awaiting its right valley
    double candidate_valley_ = 0;  // valley preceding the candidate
    std::vector<double> maxima_;
    size_t drop_ = 0;  // count of evicted oldest maxima
};

enum class SweepParameter { Delta, Omega, ModFreq, ModIndex };
enum class SweepDirection { Forward, Backward };

std::string to_string(SweepParameter parameter);
std::string to_string(SweepDirection direction);

struct SweepSpec {
    SweepParameter parameter = SweepParameter::Delta;
    double lo = 0.0;
    double hi = 1.0;
    int points = 2;
    SweepDirection direction = SweepDirection::Forward;
    // Seed each point with the previous point's final state (hysteresis /
    // multistability tracing). Continuation sweeps run sequentially.
    bool continuation = false;
    std::uint64_t ic_seed = 1;
    double ic_noise = 1e-3;
};

// Returns a copy of params with the swept parameter set to `value`.
ModelParams apply_parameter(const ModelParams& params, SweepParameter parameter, double value);

struct MaximaOptions {
    bool capture = false;
    double window = 2000.0;  // trailing span of the averaging phase to scan
    double min_prominence = 1e-4;
    int max_count = 4000;
};

struct SweepOptions {
    MaximaOptions maxima;
    int threads = 0;  // 0 = hardware concurrency; continuation ignores this
};

struct SweepRecord {
    double value = 0.0;  // swept parameter at this grid point
    bool ok = false;
    std::string error;
    Eigen::VectorXd exponents;
    Regime regime;
    bool converged = true;
    double drift = 0.0;
    std::vector<double> maxima;
    ChainState final_state;
};

// Lyapunov spectrum and regime per grid point, traversal order. Per-point
// failures land in the record; the sweep continues. The conditional flag of
// the Lyapunov config is set from the drive kind.
std::vector<SweepRecord> sweep_1d(const SweepSpec& spec, const ModelParams& params,
                                  const LyapunovConfig& lyapunov,
                                  const IntegratorConfig& integrator = {},
                                  const SweepOptions& options = {});

struct MapSpec {
    double delta_lo = 0.0, delta_hi = 1.0;
    int delta_points = 2;
    double omega_lo = 0.0, omega_hi = 1.0;
    int omega_points = 2;
    std::uint64_t ic_seed = 1;
    double ic_noise = 1e-3;
};

struct RegimeGrid {
    Eigen::VectorXd delta_axis;  // strictly increasing
    Eigen::VectorXd omega_axis;  // strictly increasing
    std::vector<SweepRecord> cells;  // row-major: [i_delta * omega_points + i_omega]

    const SweepRecord& at(int i_delta, int i_omega) const {
        return cells[static_cast<size_t>(i_delta) * omega_axis.size() + i_omega];
    }
};

// Full (delta, omega) classification grid; cells are independent fresh-IC
// computations evaluated concurrently.
RegimeGrid map_2d(const MapSpec& spec, const ModelParams& params,
                  const LyapunovConfig& lyapunov, const IntegratorConfig& integrator = {},
                  int threads = 0);

struct ScalingPoint {
    int n_qubits = 0;
    bool ok = false;
    std::string error;
    int positive_count = 0;  // M
    Eigen::VectorXd exponents;
};

// Positive-exponent count M as a function of system size, rebuilding the
// topology kind of `params` at each N.
std::vector<ScalingPoint> scaling_study(const std::vector<int>& n_list, const ModelParams& params,
                                        const LyapunovConfig& lyapunov,
                                        const IntegratorConfig& integrator = {},
                                        std::uint64_t ic_seed = 1, double ic_noise = 1e-3,
                                        int threads = 0);

// Sweep of the drive-modulation frequency (or index) with conditional
// spectra and bifurcation maxima; requires a modulated drive.
std::vector<SweepRecord> control_study(const SweepSpec& spec, const ModelParams& params,
                                       const LyapunovConfig& lyapunov,
                                       const IntegratorConfig& integrator = {},
                                       const SweepOptions& options = {});

}  // namespace qchain
