#include "qchain/analysis.hpp"

#include "qchain/parallel.hpp"
#include "qchain/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qchain {

BlochSteadyState steady_state_bloch(double delta, double omega) {
    double q = 4.0 * delta * delta + 1.0;
    double w = -q / (q + 2.0 * omega * omega);
    double v = omega * w / q;
    double u = -2.0 * delta * v;
    return {w, u, v};
}

MaximaDetector::MaximaDetector(double min_prominence, int max_count)
    : min_prominence_(min_prominence), max_count_(static_cast<size_t>(std::max(1, max_count))) {
    valley_before_ = std::numeric_limits<double>::infinity();
}

void MaximaDetector::confirm(double valley_after) {
    double prominence = candidate_ - std::max(candidate_valley_, valley_after);
    if (prominence >= min_prominence_) {
        maxima_.push_back(candidate_);
        if (maxima_.size() > max_count_) {
            maxima_.erase(maxima_.begin());
            ++drop_;
        }
    }
    have_candidate_ = false;
}

void MaximaDetector::feed(double sample) {
    ++seen_;
    if (seen_ >= 3 && prev_ > prev2_ && prev_ > sample) {
        // prev_ is a strict local maximum; refine through the triple.
        double denom = 2.0 * prev_ - prev2_ - sample;
        double refined = denom > 0.0
                             ? prev_ + (sample - prev2_) * (sample - prev2_) / (8.0 * denom)
                             : prev_;
        // The valley tracked since the previous maximum closes that
        // candidate and opens this one.
        if (have_candidate_) confirm(valley_before_);
        candidate_ = refined;
        candidate_valley_ = valley_before_;
        have_candidate_ = true;
        valley_before_ = sample;
    } else {
        valley_before_ = std::min(valley_before_, sample);
    }
    prev2_ = prev_;
    prev_ = sample;
}

std::vector<double> MaximaDetector::values() const {
    std::vector<double> out = maxima_;
    if (have_candidate_) {
        // Close the trailing candidate with the valley seen so far.
        double prominence = candidate_ - std::max(candidate_valley_, valley_before_);
        if (prominence >= min_prominence_) {
            out.push_back(candidate_);
            if (out.size() > max_count_) out.erase(out.begin());
        }
    }
    return out;
}

std::vector<double> local_maxima(std::span<const double> series, double min_prominence) {
    if (series.size() < 3)
        throw std::invalid_argument("local_maxima: series needs at least 3 samples");
    MaximaDetector detector(min_prominence, std::numeric_limits<int>::max());
    for (double sample : series) detector.feed(sample);
    return detector.values();
}

std::string to_string(SweepParameter parameter) {
    switch (parameter) {
        case SweepParameter::Delta: return "delta";
        case SweepParameter::Omega: return "omega";
        case SweepParameter::ModFreq: return "mod_freq";
        case SweepParameter::ModIndex: return "mod_index";
    }
    return "?";
}

std::string to_string(SweepDirection direction) {
    return direction == SweepDirection::Forward ? "forward" : "backward";
}

ModelParams apply_parameter(const ModelParams& params, SweepParameter parameter, double value) {
    ModelParams out = params;
    switch (parameter) {
        case SweepParameter::Delta: out.delta = value; break;
        case SweepParameter::Omega: out.drive.omega_m = value; break;
        case SweepParameter::ModFreq: out.drive.mod_freq = value; break;
        case SweepParameter::ModIndex: out.drive.mod_index = value; break;
    }
    return out;
}

namespace {

std::vector<double> grid_values(const SweepSpec& spec) {
    if (spec.points < 2) throw std::invalid_argument("sweep: points must be >= 2");
    if (!(spec.lo < spec.hi)) throw std::invalid_argument("sweep: need lo < hi");
    std::vector<double> values(spec.points);
    double step = (spec.hi - spec.lo) / (spec.points - 1);
    for (int i = 0; i < spec.points; ++i) values[i] = spec.lo + step * i;
    if (spec.direction == SweepDirection::Backward)
        std::reverse(values.begin(), values.end());
    return values;
}

SweepRecord eval_point(const ModelParams& params, const ChainState& ic,
                       const LyapunovConfig& lyapunov, const IntegratorConfig& integrator,
                       const MaximaOptions& maxima) {
    SweepRecord rec;
    try {
        MaximaDetector detector(maxima.min_prominence, maxima.max_count);
        Observer observer{};
        if (maxima.capture) {
            double capture_from =
                lyapunov.transient + std::max(0.0, lyapunov.averaging_time - maxima.window);
            observer = [&detector, capture_from](double tau, const StateView& state) {
                if (tau >= capture_from) detector.feed(state.w(0));
            };
        }
        LyapunovResult res = lyapunov_spectrum(params, ic, lyapunov, integrator, observer);
        rec.exponents = res.exponents;
        rec.regime = res.classification;
        rec.converged = res.converged;
        rec.drift = res.drift;
        rec.final_state = res.final_state;
        if (maxima.capture) rec.maxima = detector.values();
        rec.ok = true;
    } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
    }
    return rec;
}

LyapunovConfig resolve_conditional(LyapunovConfig lyapunov, const ModelParams& params) {
    lyapunov.conditional = params.drive.kind == DriveKind::Modulated;
    return lyapunov;
}

}  // namespace

std::vector<SweepRecord> sweep_1d(const SweepSpec& spec, const ModelParams& params,
                                  const LyapunovConfig& lyapunov,
                                  const IntegratorConfig& integrator,
                                  const SweepOptions& options) {
    if ((spec.parameter == SweepParameter::ModFreq || spec.parameter == SweepParameter::ModIndex) &&
        params.drive.kind != DriveKind::Modulated)
        throw std::invalid_argument("sweep: modulation parameters require a modulated drive");
    std::vector<double> values = grid_values(spec);
    LyapunovConfig lyap = resolve_conditional(lyapunov, params);
    std::vector<SweepRecord> records(values.size());
    ChainState fresh = noisy_ground_state(params.n(), spec.ic_seed, spec.ic_noise);

    if (spec.continuation) {
        ChainState ic = fresh;
        for (size_t i = 0; i < values.size(); ++i) {
            ModelParams point = apply_parameter(params, spec.parameter, values[i]);
            records[i] = eval_point(point, ic, lyap, integrator, options.maxima);
            records[i].value = values[i];
            ic = records[i].ok ? records[i].final_state : fresh;
        }
    } else {
        parallel_for(static_cast<long long>(values.size()), options.threads, [&](long long i) {
            ModelParams point = apply_parameter(params, spec.parameter, values[i]);
            records[i] = eval_point(point, fresh, lyap, integrator, options.maxima);
            records[i].value = values[i];
        });
    }
    return records;
}

RegimeGrid map_2d(const MapSpec& spec, const ModelParams& params,
                  const LyapunovConfig& lyapunov, const IntegratorConfig& integrator,
                  int threads) {
    if (spec.delta_points < 2 || spec.omega_points < 2)
        throw std::invalid_argument("map: axis resolution must be >= 2");
    if (!(spec.delta_lo < spec.delta_hi) || !(spec.omega_lo < spec.omega_hi))
        throw std::invalid_argument("map: need lo < hi on both axes");
    RegimeGrid grid;
    grid.delta_axis.setLinSpaced(spec.delta_points, spec.delta_lo, spec.delta_hi);
    grid.omega_axis.setLinSpaced(spec.omega_points, spec.omega_lo, spec.omega_hi);
    grid.cells.resize(static_cast<size_t>(spec.delta_points) * spec.omega_points);
    LyapunovConfig lyap = resolve_conditional(lyapunov, params);
    ChainState fresh = noisy_ground_state(params.n(), spec.ic_seed, spec.ic_noise);

    parallel_for(static_cast<long long>(grid.cells.size()), threads, [&](long long idx) {
        int i_delta = static_cast<int>(idx) / spec.omega_points;
        int i_omega = static_cast<int>(idx) % spec.omega_points;
        ModelParams point = params;
        point.delta = grid.delta_axis[i_delta];
        point.drive.omega_m = grid.omega_axis[i_omega];
        SweepRecord rec = eval_point(point, fresh, lyap, integrator, MaximaOptions{});
        rec.value = grid.delta_axis[i_delta];
        grid.cells[idx] = std::move(rec);
    });
    return grid;
}

std::vector<ScalingPoint> scaling_study(const std::vector<int>& n_list, const ModelParams& params,
                                        const LyapunovConfig& lyapunov,
                                        const IntegratorConfig& integrator,
                                        std::uint64_t ic_seed, double ic_noise, int threads) {
    for (size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1])
            throw std::invalid_argument("scaling: n_list must be strictly ascending");
    std::vector<ScalingPoint> points(n_list.size());
    LyapunovConfig lyap = resolve_conditional(lyapunov, params);

    parallel_for(static_cast<long long>(n_list.size()), threads, [&](long long i) {
        ScalingPoint& point = points[i];
        point.n_qubits = n_list[i];
        try {
            ModelParams sized = params;
            sized.topology = CouplingTopology::make(params.topology.kind(), n_list[i]);
            if (params.delta_offsets.size() != 0 && params.delta_offsets.size() != n_list[i])
                throw std::invalid_argument("scaling: delta_offsets do not fit this N");
            LyapunovConfig cfg = lyap;
            if (cfg.n_exponents != 0) cfg.n_exponents = std::min(cfg.n_exponents, 3 * n_list[i]);
            ChainState ic = noisy_ground_state(n_list[i], ic_seed, ic_noise);
            LyapunovResult res = lyapunov_spectrum(sized, ic, cfg, integrator);
            point.positive_count = count_positive(res.exponents, cfg.zero_tol);
            point.exponents = res.exponents;
            point.ok = true;
        } catch (const std::exception& e) {
            point.ok = false;
            point.error = e.what();
        }
    });
    return points;
}

std::vector<SweepRecord> control_study(const SweepSpec& spec, const ModelParams& params,
                                       const LyapunovConfig& lyapunov,
                                       const IntegratorConfig& integrator,
                                       const SweepOptions& options) {
    if (params.drive.kind != DriveKind::Modulated)
        throw std::invalid_argument("control: requires a modulated drive");
    if (spec.parameter != SweepParameter::ModFreq && spec.parameter != SweepParameter::ModIndex)
        throw std::invalid_argument("control: sweep parameter must be mod_freq or mod_index");
    SweepOptions opts = options;
    opts.maxima.capture = true;
    return sweep_1d(spec, params, lyapunov, integrator, opts);
}

}  // namespace qchain
