#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "clustersync/control.hpp"
#include "clustersync/network.hpp"

namespace clustersync {

struct Theorem1Params {
    Matrix Q, E1, E2;
    double alpha = 1.0;
    double beta = 1.0;
    double lambda = 0.1;   // exponential decay rate (convergence rate lambda/2)
    double gamma = 1.0;    // Razumikhin gamma >= 1
    double q = 1.0;        // Razumikhin constant, q >= gamma e^{lambda tau_bar}
    std::optional<double> epsilon;           // condition-(11) epsilon; defaults to q
    std::optional<double> mu_override;       // replace the derived mu
    std::optional<double> upsilon_override;  // replace the derived upsilon
};

struct Theorem2Params {
    double alpha = 1.0;
    double beta = 1.0;
    Matrix E1, E2;
};

struct ConditionRecord {
    std::string name;
    double value = 0;
    double bound = 0;
    bool pass = false;
    std::string note;
};

struct CriteriaReport {
    std::vector<ConditionRecord> conditions;
    std::map<std::string, double> derived;
    std::vector<std::string> notes;

    bool overall_pass() const;
    std::string to_text() const;
    nlohmann::json to_json() const;
};

/// Assembles the proof's dissipation matrix per cluster and returns the pair
/// (mu, upsilon) with dV/dt <= mu V + upsilon sup V(t + theta) for
/// V = sum e_i^T Q e_i.
std::pair<double, double> compute_mu_upsilon(const ValidatedNetwork& network,
                                             const Theorem1Params& params);

/// Per-impulse Lyapunov contraction factor (worst cluster).
double eta_k(const Matrix& Q, double d_k, const ClusterPartition& partition,
             const std::vector<int>& rho);

CriteriaReport check_theorem1(const ValidatedNetwork& network, const Theorem1Params& params,
                              const PinningImpulsiveConfig& pinning);

CriteriaReport check_theorem2(const ValidatedNetwork& network, const Theorem2Params& params,
                              double g1, double k1);

/// Finite-time settling offset (2 V0)^{(1-mu)/2} / (k (1-mu)).
double settling_time(double V0, double k, double mu_exp);

double lyapunov_V1(const Matrix& E, const Matrix& Q);

/// 1/2 sum e_i^T e_i + 1/2 k1 sum I_tau_i + g1 sum_{non-boundary} I_fut_i.
double lyapunov_V2(const Matrix& E, const Vector& I_tau, const Vector& I_fut,
                   const std::vector<bool>& boundary, double k1, double g1);

/// (sum ||x_i||^2)^{q/2} <= sum ||x_i||^q for 0 < q < 2 (test oracle).
bool power_mean_check(const std::vector<Vector>& vectors, double q);

}  // namespace clustersync
