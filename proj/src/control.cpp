#include "clustersync/control.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace clustersync {

std::vector<int> PinnedSet::flatten() const {
    std::vector<int> all;
    for (const auto& c : per_cluster) all.insert(all.end(), c.begin(), c.end());
    return all;
}

PinnedSet select_pinned_nodes(const Vector& error_norms, const ClusterPartition& partition,
                              double d_k, const std::vector<int>& rho) {
    const int M = partition.num_clusters();
    if (static_cast<int>(rho.size()) != M)
        throw Error(Error::Code::BadArgument, "rho must have one entry per cluster");
    const bool largest_first = (d_k > -2.0 && d_k < 0.0);  // form (a)

    PinnedSet out;
    out.per_cluster.resize(static_cast<std::size_t>(M));
    for (int p = 1; p <= M; ++p) {
        const int lo = partition.boundaries[p - 1] + 1;
        const int hi = partition.boundaries[p];
        if (rho[p - 1] < 0 || rho[p - 1] > hi - lo + 1)
            throw Error(Error::Code::RhoTooLarge,
                        "rho_" + std::to_string(p) + " exceeds cluster size");
        std::vector<int> idx(static_cast<std::size_t>(hi - lo + 1));
        std::iota(idx.begin(), idx.end(), lo);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            double na = error_norms[a - 1], nb = error_norms[b - 1];
            if (na != nb) return largest_first ? na > nb : na < nb;
            return a < b;
        });
        idx.resize(static_cast<std::size_t>(rho[p - 1]));
        std::sort(idx.begin(), idx.end());
        out.per_cluster[p - 1] = std::move(idx);
    }
    return out;
}

double PinningImpulsiveConfig::gain_at(int k) const {
    if (gains.empty()) throw Error(Error::Code::BadArgument, "no impulse gains configured");
    if (gains.size() == 1) return gains[0];
    if (k < 1 || k > static_cast<int>(gains.size()))
        throw Error(Error::Code::OutOfRange, "no gain for impulse " + std::to_string(k));
    return gains[static_cast<std::size_t>(k - 1)];
}

Matrix impulsive_control_jump(const Matrix& E, const ClusterPartition& partition,
                              const PinningImpulsiveConfig& config, int k, PinnedSet* selected) {
    const double d_k = config.gain_at(k);
    PinnedSet set;
    if (config.fixed_nodes) {
        set.per_cluster.resize(static_cast<std::size_t>(partition.num_clusters()));
        for (int i : *config.fixed_nodes)
            set.per_cluster[static_cast<std::size_t>(partition.cluster_of(i) - 1)].push_back(i);
    } else {
        set = select_pinned_nodes(E.rowwise().norm(), partition, d_k, config.rho);
    }
    if (selected) *selected = set;
    return apply_impulse_event(E, set.flatten(), d_k);
}

Vector psi(const Vector& e_i, double norm_e, double epsilon) {
    if (norm_e > epsilon) return e_i / (norm_e * norm_e);
    return Vector::Zero(e_i.size());
}

namespace {

Vector signed_power(const Vector& e, double mu) {
    Vector out(e.size());
    for (Eigen::Index j = 0; j < e.size(); ++j) {
        double v = e[j];
        out[j] = (v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0)) * std::pow(std::abs(v), mu);
    }
    return out;
}

}  // namespace

Vector hybrid_control_input(bool boundary, const Vector& e_i, double norm_e, double I_tau,
                            double I_fut, const HybridConfig& cfg) {
    const double pw = (1.0 + cfg.mu_exp) / 2.0;
    Vector phi = cfg.k * signed_power(e_i, cfg.mu_exp) +
                 cfg.k * std::pow(cfg.k1 * std::max(I_tau, 0.0), pw) *
                     psi(e_i, norm_e, cfg.psi_epsilon);
    if (boundary) return -cfg.g1 * e_i - phi;
    return -phi - 2.0 * cfg.k * std::pow(cfg.g1 * std::max(I_fut, 0.0), pw) *
                      psi(e_i, norm_e, cfg.psi_epsilon);
}

std::vector<int> derive_boundary_nodes(const Matrix& G, const ClusterPartition& partition) {
    std::vector<int> boundary;
    const int N = partition.num_nodes();
    for (int i = 1; i <= N; ++i) {
        const int p = partition.cluster_of(i);
        bool connected = false;
        for (int j = 1; j <= N && !connected; ++j) {
            if (partition.cluster_of(j) == p) continue;
            if (G(i - 1, j - 1) != 0.0 || G(j - 1, i - 1) != 0.0) connected = true;
        }
        if (connected) boundary.push_back(i);
    }
    return boundary;
}

double forward_integral_estimate(const Trajectory* previous_pass, int node, double t,
                                 double t1_est, FutureMode mode) {
    if (mode == FutureMode::ZeroFuture) return 0.0;
    if (!previous_pass)
        throw Error(Error::Code::NoPreviousPass, "iterative mode needs a previous pass");
    if (t >= t1_est) return 0.0;
    const double hi = std::min(t1_est, previous_pass->times.back());
    if (hi <= t) return 0.0;
    // integral over [t, hi] = integral over [hi - (hi - t), hi]
    return running_integral(*previous_pass, node, hi, hi - std::max(t, 0.0));
}

}  // namespace clustersync
