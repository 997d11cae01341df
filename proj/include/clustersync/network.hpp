#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clustersync/error.hpp"

namespace clustersync {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Cluster boundaries v_0 = 0 < v_1 < ... < v_M = N. Cluster p (1-based)
/// holds the nodes v_{p-1}+1 .. v_p (1-based node indices).
struct ClusterPartition {
    std::vector<int> boundaries;

    int num_clusters() const { return static_cast<int>(boundaries.size()) - 1; }
    int num_nodes() const { return boundaries.empty() ? 0 : boundaries.back(); }
    int size(int p) const { return boundaries.at(p) - boundaries.at(p - 1); }

    /// 1-based node index -> 1-based cluster index.
    int cluster_of(int i) const;

    void validate() const;
};

int cluster_of(const ClusterPartition& partition, int i);

/// Componentwise activation with a per-cluster Lipschitz constant.
struct ActivationSpec {
    enum class Kind { Arctan, Custom };

    Kind kind = Kind::Arctan;
    std::function<double(double)> map;  // Custom only
    std::vector<double> xi;             // declared per-cluster constants (Custom)

    Vector apply(const Vector& x) const;
    double apply_scalar(double r) const;
};

/// Per-cluster Lipschitz bounds; arctan yields 1 for every cluster.
std::vector<double> lipschitz_bound(const ActivationSpec& activation, int num_clusters);

/// Time-varying transmittal delay tau(t) with sup tau = tau_bar and
/// sup tau' = sigma < 1.
struct DelayEvaluator {
    enum class Form { Constant, Logistic, Tabulated };

    Form form = Form::Constant;
    double c = 1.0;   // Constant
    double a = 1.7;   // Logistic: tau(t) = a e^t / (1 + e^t)
    std::vector<double> t_tab, v_tab;

    double tau_bar = 1.0;
    double sigma = 0.0;

    static DelayEvaluator constant(double c);
    static DelayEvaluator logistic(double a);
    static DelayEvaluator tabulated(std::vector<double> times, std::vector<double> values,
                                    double tau_bar, double sigma);

    double tau(double t) const;
};

struct ClusterParams {
    Matrix C;  // self-inhibition, symmetric positive definite
    Matrix A;  // connection weights
    Matrix B;  // delayed connection weights
    Vector I;  // external input
};

struct NetworkSpec {
    int n = 0;
    ClusterPartition partition;
    std::vector<ClusterParams> params;  // one per cluster
    Matrix G;                           // N x N coupling
    ActivationSpec activation;
    DelayEvaluator delay;
};

class ValidatedNetwork {
public:
    const NetworkSpec& spec() const { return spec_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    int num_nodes() const { return spec_.partition.num_nodes(); }
    int num_clusters() const { return spec_.partition.num_clusters(); }
    int dim() const { return spec_.n; }
    int cluster_of(int i) const { return spec_.partition.cluster_of(i); }
    const ClusterParams& cluster_params(int p) const { return spec_.params.at(p - 1); }

    double lipschitz(int p) const { return xi_.at(p - 1); }
    double xi_max() const;

    /// Right-hand side of the leader dynamics for cluster p.
    Vector leader_rhs(int p, const Vector& s_now, const Vector& s_delayed) const;

    /// Right-hand side of the coupled network; rows of X are node states.
    Matrix coupled_rhs(double t, const Matrix& X, const Matrix& X_delayed,
                       const Matrix& U) const;

    /// Right-hand side of the error system: rows of E are node errors, rows of
    /// S / S_delayed the per-cluster leader states entering F(e) = f(e+s) - f(s).
    Matrix error_rhs(const Matrix& E, const Matrix& E_delayed, const Matrix& S,
                     const Matrix& S_delayed, const Matrix& U) const;

private:
    friend ValidatedNetwork validate_network(const NetworkSpec&, bool);
    NetworkSpec spec_;
    std::vector<double> xi_;
    std::vector<std::string> warnings_;
};

/// Checks all structural invariants; block-class (Assumption-style) violations
/// are warnings unless strict_blocks is set.
ValidatedNetwork validate_network(const NetworkSpec& spec, bool strict_blocks = false);

/// Row i of the result is x_i - s_{cluster(i)}.
Matrix error_state(const ClusterPartition& partition, const Matrix& X, const Matrix& S);

}  // namespace clustersync
