#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

// Mean-field dynamics of a driven, dissipative lattice of two-level units.
// All quantities are dimensionless: time is measured in units of the decay
// rate (tau = gamma*t), detuning and Rabi frequency in units of gamma.
namespace qchain {

// Numerical slack allowed on the Bloch-ball bound w^2 + 4|q|^2 <= 1.
inline constexpr double kBlochSlack = 1e-9;

enum class TopologyKind { AllToAll, Ring, OpenChain, SquareLattice, Custom };

std::string to_string(TopologyKind kind);

// Which units enter each unit's interaction sum. Stored as a symmetric,
// zero-diagonal 0/1 adjacency in compressed (neighbor-list) form.
class CouplingTopology {
public:
    CouplingTopology() = default;

    static CouplingTopology all_to_all(int n);
    static CouplingTopology ring(int n);
    static CouplingTopology open_chain(int n);
    static CouplingTopology square_lattice(int side);
    static CouplingTopology custom(const Eigen::MatrixXi& adjacency);

    // Builds one of the named kinds for n units (side = sqrt(n) for lattices).
    static CouplingTopology make(TopologyKind kind, int n);

    TopologyKind kind() const { return kind_; }
    int n() const { return n_; }
    // Side length L for SquareLattice (n = L^2), 0 otherwise.
    int lattice_side() const { return side_; }

    std::span<const int> neighbors(int j) const;
    int degree(int j) const { return offset_[j + 1] - offset_[j]; }
    Eigen::MatrixXi adjacency() const;

    bool operator==(const CouplingTopology& other) const;

private:
    CouplingTopology(TopologyKind kind, int n, int side,
                     std::vector<int> offset, std::vector<int> nbr);
    static CouplingTopology from_edge_lists(TopologyKind kind, int n, int side,
                                            const std::vector<std::vector<int>>& nbrs);

    TopologyKind kind_ = TopologyKind::AllToAll;
    int n_ = 0;
    int side_ = 0;
    std::vector<int> offset_{0};  // size n_+1, CSR row offsets
    std::vector<int> nbr_;        // concatenated neighbor indices
};

// Per-unit state: population inversion w_j and coherence q_j = u_j + i v_j.
// Physical states satisfy w^2 + 4(u^2 + v^2) <= 1 for every unit.
struct ChainState {
    Eigen::VectorXd w;
    Eigen::VectorXd u;
    Eigen::VectorXd v;

    ChainState() = default;
    ChainState(Eigen::VectorXd w_, Eigen::VectorXd u_, Eigen::VectorXd v_);

    int n() const { return static_cast<int>(w.size()); }

    // Ground state: w = -1, q = 0.
    static ChainState ground(int n);

    // Packed coordinates [w_0..w_{N-1}, u_0.., v_0..] used by the integrator
    // and by the Jacobian's row/column ordering.
    Eigen::VectorXd packed() const;
    static ChainState from_packed(const Eigen::VectorXd& y);
};

enum class DriveKind { Constant, Modulated };

std::string to_string(DriveKind kind);

// Rabi drive, either constant or sinusoidally modulated in amplitude:
// Omega(tau) = omega_m * (1 + mod_index * sin(2*pi*mod_freq*tau)).
struct DriveSpec {
    DriveKind kind = DriveKind::Constant;
    double omega_m = 0.0;
    double mod_index = 0.0;  // M in [0, 1]; ignored for Constant
    double mod_freq = 0.0;   // cycles per unit tau; ignored for Constant

    static DriveSpec constant(double omega);
    static DriveSpec modulated(double omega_m, double mod_index, double mod_freq);
};

double effective_rabi(const DriveSpec& drive, double tau);

struct ModelParams {
    double delta = 0.0;  // detuning in units of gamma
    DriveSpec drive;
    double c = 0.0;      // interaction strength in units of gamma
    Eigen::VectorXd delta_offsets;  // per-unit disorder; empty means all zero
    CouplingTopology topology;

    int n() const { return topology.n(); }
    double delta_at(int j) const {
        return delta + (delta_offsets.size() > 0 ? delta_offsets[j] : 0.0);
    }
};

// Uniform disorder offsets in [-sigma, sigma], deterministic in the seed.
Eigen::VectorXd sample_delta_offsets(int n, double sigma, std::uint64_t seed);

// Interaction field seen by unit j: c * sum over neighbors k of (w_k + 1).
double coupling_field(const ChainState& state, const CouplingTopology& topology,
                      double c, int j);

// Time derivative of the state:
//   dw_j = -2 Omega v_j - (w_j + 1)
//   du_j = -(Delta_j - S_j) v_j - u_j / 2
//   dv_j =  (Delta_j - S_j) u_j - v_j / 2 + (Omega / 2) w_j
// with S_j the coupling field and Omega the instantaneous Rabi frequency.
ChainState rhs(const ChainState& state, const ModelParams& params, double tau);

// Exact linearization of rhs in packed coordinates (3N x 3N). Its trace is
// -2N for every state and time.
Eigen::MatrixXd jacobian(const ChainState& state, const ModelParams& params,
                         double tau);

// Empty iff all ChainState invariants hold; otherwise one message per violation.
std::vector<std::string> validate_state(const ChainState& state);

// Ground state plus uniform noise of the given amplitude on every component,
// clipped back onto the Bloch ball where the noise pushed a unit outside.
// Deterministic in the seed.
ChainState noisy_ground_state(int n, std::uint64_t seed, double noise);

// Allocation-free evaluation of the vector field and its tangent dynamics on
// packed coordinates; the integrator's inner loop.
class VectorField {
public:
    explicit VectorField(const ModelParams& params);

    int n() const { return n_; }
    int dim() const { return 3 * n_; }

    // dy = f(y, tau)
    void eval(double tau, const double* y, double* dy);

    // dy = f(y, tau) and dtan = J(y, tau) * tan for k column vectors
    // (column-major, leading dimension 3N).
    void eval_with_tangents(double tau, const double* y, const double* tan,
                            double* dy, double* dtan, int k);

private:
    void compute_fields(const double* y);

    const ModelParams* params_;
    int n_;
    std::vector<double> det_eff_;  // Delta_j - S_j at the current base state
    std::vector<double> dfield_;   // per-column coupling-field perturbation
};

}  // namespace qchain
