#include "qchain/model.hpp"

#include "qchain/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace qchain {

std::string to_string(TopologyKind kind) {
    switch (kind) {
        case TopologyKind::AllToAll: return "all_to_all";
        case TopologyKind::Ring: return "ring";
        case TopologyKind::OpenChain: return "open_chain";
        case TopologyKind::SquareLattice: return "square_lattice";
        case TopologyKind::Custom: return "custom";
    }
    return "?";
}

std::string to_string(DriveKind kind) {
    return kind == DriveKind::Constant ? "constant" : "modulated";
}

CouplingTopology::CouplingTopology(TopologyKind kind, int n, int side,
                                   std::vector<int> offset, std::vector<int> nbr)
    : kind_(kind), n_(n), side_(side), offset_(std::move(offset)), nbr_(std::move(nbr)) {}

CouplingTopology CouplingTopology::from_edge_lists(TopologyKind kind, int n, int side,
                                                   const std::vector<std::vector<int>>& nbrs) {
    std::vector<int> offset(n + 1, 0);
    std::vector<int> flat;
    for (int j = 0; j < n; ++j) {
        offset[j + 1] = offset[j] + static_cast<int>(nbrs[j].size());
        flat.insert(flat.end(), nbrs[j].begin(), nbrs[j].end());
    }
    return CouplingTopology(kind, n, side, std::move(offset), std::move(flat));
}

CouplingTopology CouplingTopology::all_to_all(int n) {
    if (n < 1) throw std::invalid_argument("topology: n must be >= 1");
    std::vector<std::vector<int>> nbrs(n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            if (k != j) nbrs[j].push_back(k);
    return from_edge_lists(TopologyKind::AllToAll, n, 0, nbrs);
}

CouplingTopology CouplingTopology::ring(int n) {
    if (n < 1) throw std::invalid_argument("topology: n must be >= 1");
    std::vector<std::vector<int>> nbrs(n);
    // n <= 3 coincides with all-to-all; in particular n = 2 carries a single
    // edge (the 0/1 adjacency cannot hold a doubled bond).
    for (int j = 0; j < n; ++j) {
        int prev = (j + n - 1) % n;
        int next = (j + 1) % n;
        if (prev != j) nbrs[j].push_back(prev);
        if (next != j && next != prev) nbrs[j].push_back(next);
    }
    return from_edge_lists(TopologyKind::Ring, n, 0, nbrs);
}

CouplingTopology CouplingTopology::open_chain(int n) {
    if (n < 1) throw std::invalid_argument("topology: n must be >= 1");
    std::vector<std::vector<int>> nbrs(n);
    for (int j = 0; j < n; ++j) {
        if (j > 0) nbrs[j].push_back(j - 1);
        if (j + 1 < n) nbrs[j].push_back(j + 1);
    }
    return from_edge_lists(TopologyKind::OpenChain, n, 0, nbrs);
}

CouplingTopology CouplingTopology::square_lattice(int side) {
    if (side < 1) throw std::invalid_argument("topology: lattice side must be >= 1");
    int n = side * side;
    std::vector<std::vector<int>> nbrs(n);
    auto id = [side](int row, int col) { return row * side + col; };
    for (int row = 0; row < side; ++row) {
        for (int col = 0; col < side; ++col) {
            int j = id(row, col);
            if (row > 0) nbrs[j].push_back(id(row - 1, col));
            if (col > 0) nbrs[j].push_back(id(row, col - 1));
            if (col + 1 < side) nbrs[j].push_back(id(row, col + 1));
            if (row + 1 < side) nbrs[j].push_back(id(row + 1, col));
        }
    }
    return from_edge_lists(TopologyKind::SquareLattice, n, side, nbrs);
}

CouplingTopology CouplingTopology::custom(const Eigen::MatrixXi& adjacency) {
    int n = static_cast<int>(adjacency.rows());
    if (n < 1 || adjacency.cols() != n)
        throw std::invalid_argument("topology: adjacency must be square, n >= 1");
    std::vector<std::vector<int>> nbrs(n);
    for (int j = 0; j < n; ++j) {
        if (adjacency(j, j) != 0)
            throw std::invalid_argument("topology: adjacency diagonal must be zero");
        for (int k = 0; k < n; ++k) {
            int a = adjacency(j, k);
            if (a != 0 && a != 1)
                throw std::invalid_argument("topology: adjacency entries must be 0/1");
            if (a != adjacency(k, j))
                throw std::invalid_argument("topology: adjacency must be symmetric");
            if (a == 1) nbrs[j].push_back(k);
        }
    }
    return from_edge_lists(TopologyKind::Custom, n, 0, nbrs);
}

CouplingTopology CouplingTopology::make(TopologyKind kind, int n) {
    switch (kind) {
        case TopologyKind::AllToAll: return all_to_all(n);
        case TopologyKind::Ring: return ring(n);
        case TopologyKind::OpenChain: return open_chain(n);
        case TopologyKind::SquareLattice: {
            int side = static_cast<int>(std::lround(std::sqrt(double(n))));
            if (side * side != n)
                throw std::invalid_argument("topology: square lattice needs n = L^2");
            return square_lattice(side);
        }
        case TopologyKind::Custom:
            throw std::invalid_argument("topology: custom requires an adjacency matrix");
    }
    throw std::invalid_argument("topology: unknown kind");
}

std::span<const int> CouplingTopology::neighbors(int j) const {
    if (j < 0 || j >= n_) throw std::out_of_range("topology: unit index out of range");
    return {nbr_.data() + offset_[j], static_cast<size_t>(offset_[j + 1] - offset_[j])};
}

Eigen::MatrixXi CouplingTopology::adjacency() const {
    Eigen::MatrixXi a = Eigen::MatrixXi::Zero(n_, n_);
    for (int j = 0; j < n_; ++j)
        for (int k : neighbors(j)) a(j, k) = 1;
    return a;
}

bool CouplingTopology::operator==(const CouplingTopology& other) const {
    return kind_ == other.kind_ && n_ == other.n_ && side_ == other.side_ &&
           offset_ == other.offset_ && nbr_ == other.nbr_;
}

ChainState::ChainState(Eigen::VectorXd w_, Eigen::VectorXd u_, Eigen::VectorXd v_)
    : w(std::move(w_)), u(std::move(u_)), v(std::move(v_)) {
    if (w.size() < 1 || u.size() != w.size() || v.size() != w.size())
        throw std::invalid_argument("state: w, u, v must have equal length >= 1");
}

ChainState ChainState::ground(int n) {
    return ChainState(Eigen::VectorXd::Constant(n, -1.0), Eigen::VectorXd::Zero(n),
                      Eigen::VectorXd::Zero(n));
}

Eigen::VectorXd ChainState::packed() const {
    Eigen::VectorXd y(3 * n());
    y.segment(0, n()) = w;
    y.segment(n(), n()) = u;
    y.segment(2 * n(), n()) = v;
    return y;
}

ChainState ChainState::from_packed(const Eigen::VectorXd& y) {
    if (y.size() % 3 != 0 || y.size() < 3)
        throw std::invalid_argument("state: packed vector length must be 3N");
    int n = static_cast<int>(y.size()) / 3;
    return ChainState(y.segment(0, n), y.segment(n, n), y.segment(2 * n, n));
}

DriveSpec DriveSpec::constant(double omega) { return {DriveKind::Constant, omega, 0.0, 0.0}; }

DriveSpec DriveSpec::modulated(double omega_m, double mod_index, double mod_freq) {
    return {DriveKind::Modulated, omega_m, mod_index, mod_freq};
}

double effective_rabi(const DriveSpec& drive, double tau) {
    if (drive.kind == DriveKind::Constant) return drive.omega_m;
    return drive.omega_m * (1.0 + drive.mod_index * std::sin(6.283185307179586477 * drive.mod_freq * tau));
}

Eigen::VectorXd sample_delta_offsets(int n, double sigma, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Eigen::VectorXd off(n);
    for (int j = 0; j < n; ++j) off[j] = rng.next_symmetric(sigma);
    return off;
}

double coupling_field(const ChainState& state, const CouplingTopology& topology,
                      double c, int j) {
    double sum = 0.0;
    for (int k : topology.neighbors(j)) sum += state.w[k] + 1.0;
    return c * sum;
}

ChainState rhs(const ChainState& state, const ModelParams& params, double tau) {
    VectorField field(params);
    Eigen::VectorXd y = state.packed();
    Eigen::VectorXd dy(y.size());
    field.eval(tau, y.data(), dy.data());
    return ChainState::from_packed(dy);
}

Eigen::MatrixXd jacobian(const ChainState& state, const ModelParams& params, double tau) {
    int n = state.n();
    double omega = effective_rabi(params.drive, tau);
    Eigen::MatrixXd j_mat = Eigen::MatrixXd::Zero(3 * n, 3 * n);
    for (int j = 0; j < n; ++j) {
        double det_eff = params.delta_at(j) - coupling_field(state, params.topology, params.c, j);
        j_mat(j, j) = -1.0;
        j_mat(j, 2 * n + j) = -2.0 * omega;
        j_mat(n + j, n + j) = -0.5;
        j_mat(n + j, 2 * n + j) = -det_eff;
        j_mat(2 * n + j, n + j) = det_eff;
        j_mat(2 * n + j, 2 * n + j) = -0.5;
        j_mat(2 * n + j, j) = 0.5 * omega;
        for (int k : params.topology.neighbors(j)) {
            j_mat(n + j, k) += params.c * state.v[j];
            j_mat(2 * n + j, k) += -params.c * state.u[j];
        }
    }
    return j_mat;
}

std::vector<std::string> validate_state(const ChainState& state) {
    std::vector<std::string> violations;
    int n = state.n();
    if (n < 1 || state.u.size() != n || state.v.size() != n) {
        violations.push_back("w, u, v must have equal length >= 1");
        return violations;
    }
    for (int j = 0; j < n; ++j) {
        double w = state.w[j], u = state.u[j], v = state.v[j];
        if (!std::isfinite(w) || !std::isfinite(u) || !std::isfinite(v)) {
            violations.push_back("unit " + std::to_string(j) + ": non-finite component");
            continue;
        }
        double ball = w * w + 4.0 * (u * u + v * v);
        if (ball > 1.0 + kBlochSlack)
            violations.push_back("unit " + std::to_string(j) + ": outside Bloch ball, w^2+4|q|^2 = " +
                                 std::to_string(ball));
    }
    return violations;
}

ChainState noisy_ground_state(int n, std::uint64_t seed, double noise) {
    SplitMix64 rng(seed);
    ChainState state = ChainState::ground(n);
    for (int j = 0; j < n; ++j) state.w[j] += rng.next_symmetric(noise);
    for (int j = 0; j < n; ++j) state.u[j] += rng.next_symmetric(noise);
    for (int j = 0; j < n; ++j) state.v[j] += rng.next_symmetric(noise);
    for (int j = 0; j < n; ++j) {
        double ball = state.w[j] * state.w[j] + 4.0 * (state.u[j] * state.u[j] + state.v[j] * state.v[j]);
        if (ball > 1.0) {
            double scale = 1.0 / std::sqrt(ball);
            state.w[j] *= scale;
            state.u[j] *= scale;
            state.v[j] *= scale;
        }
    }
    return state;
}

VectorField::VectorField(const ModelParams& params)
    : params_(&params), n_(params.n()), det_eff_(n_), dfield_(n_) {
    if (n_ < 1) throw std::invalid_argument("model: empty topology");
    if (params.delta_offsets.size() != 0 && params.delta_offsets.size() != n_)
        throw std::invalid_argument("model: delta_offsets length must be N");
}

void VectorField::compute_fields(const double* y) {
    const ModelParams& p = *params_;
    for (int j = 0; j < n_; ++j) {
        double sum = 0.0;
        for (int k : p.topology.neighbors(j)) sum += y[k] + 1.0;
        det_eff_[j] = p.delta_at(j) - p.c * sum;
    }
}

void VectorField::eval(double tau, const double* y, double* dy) {
    const double omega = effective_rabi(params_->drive, tau);
    compute_fields(y);
    const double* w = y;
    const double* u = y + n_;
    const double* v = y + 2 * n_;
    for (int j = 0; j < n_; ++j) {
        double d = det_eff_[j];
        dy[j] = -2.0 * omega * v[j] - (w[j] + 1.0);
        dy[n_ + j] = -d * v[j] - 0.5 * u[j];
        dy[2 * n_ + j] = d * u[j] - 0.5 * v[j] + 0.5 * omega * w[j];
    }
}

void VectorField::eval_with_tangents(double tau, const double* y, const double* tan,
                                     double* dy, double* dtan, int k) {
    eval(tau, y, dy);
    const ModelParams& p = *params_;
    const double omega = effective_rabi(p.drive, tau);
    const double* u = y + n_;
    const double* v = y + 2 * n_;
    const int dim = 3 * n_;
    for (int col = 0; col < k; ++col) {
        const double* tw = tan + col * dim;
        const double* tu = tw + n_;
        const double* tv = tw + 2 * n_;
        double* dw = dtan + col * dim;
        double* du = dw + n_;
        double* dv = dw + 2 * n_;
        for (int j = 0; j < n_; ++j) {
            double sum = 0.0;
            for (int nb : p.topology.neighbors(j)) sum += tw[nb];
            dfield_[j] = p.c * sum;
        }
        for (int j = 0; j < n_; ++j) {
            double d = det_eff_[j];
            dw[j] = -tw[j] - 2.0 * omega * tv[j];
            du[j] = -d * tv[j] - 0.5 * tu[j] + v[j] * dfield_[j];
            dv[j] = d * tu[j] - 0.5 * tv[j] + 0.5 * omega * tw[j] - u[j] * dfield_[j];
        }
    }
}

}  // namespace qchain
