#pragma once

#include <optional>
#include <vector>

#include "clustersync/dde.hpp"
#include "clustersync/network.hpp"

namespace clustersync {

struct PinnedSet {
    std::vector<std::vector<int>> per_cluster;  // 1-based node indices

    std::vector<int> flatten() const;
};

/// Picks rho_p nodes per cluster: the largest error norms for -2 < d_k < 0,
/// the smallest otherwise; ties resolved toward the smaller node index.
PinnedSet select_pinned_nodes(const Vector& error_norms, const ClusterPartition& partition,
                              double d_k, const std::vector<int>& rho);

struct PinningImpulsiveConfig {
    std::vector<double> gains{-0.8};  // one entry => constant d_k
    ImpulseSchedule schedule;
    std::vector<int> rho;
    std::optional<std::vector<int>> fixed_nodes;  // overrides norm-based selection

    double gain_at(int k) const;  // k >= 1
};

/// Selection + jump at impulse index k; unpinned rows untouched.
Matrix impulsive_control_jump(const Matrix& E, const ClusterPartition& partition,
                              const PinningImpulsiveConfig& config, int k,
                              PinnedSet* selected = nullptr);

/// e_i / ||e||^2 when the stacked error norm exceeds epsilon, zero otherwise.
Vector psi(const Vector& e_i, double norm_e, double epsilon);

enum class FutureMode { ZeroFuture, Iterative };

struct HybridConfig {
    double k = 2.0;
    double k1 = 1.4;
    double g1 = 41.4;
    double mu_exp = 0.5;
    double psi_epsilon = 5e-3;
    FutureMode future_mode = FutureMode::ZeroFuture;
    int passes = 3;
    std::optional<std::vector<int>> chi;  // boundary nodes override (1-based)
    double t1_estimate = 0;               // set per pass by the runner
};

/// Eq-style hybrid input for one node. boundary selects the chi_p branch.
Vector hybrid_control_input(bool boundary, const Vector& e_i, double norm_e, double I_tau,
                            double I_fut, const HybridConfig& config);

/// Nodes with any nonzero coupling entry to another cluster.
std::vector<int> derive_boundary_nodes(const Matrix& G, const ClusterPartition& partition);

/// Forward integral over [t, t1_est] from the previous pass, clamped at zero
/// after t1_est. ZeroFuture always yields 0; Iterative without a previous pass
/// raises NoPreviousPass.
double forward_integral_estimate(const Trajectory* previous_pass, int node, double t,
                                 double t1_est, FutureMode mode);

}  // namespace clustersync
