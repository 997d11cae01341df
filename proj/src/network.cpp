#include "clustersync/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace clustersync {

namespace {

constexpr double kRowSumTol = 1e-9;
constexpr double kEigTol = 1e-9;

bool symmetric_positive_definite(const Matrix& M) {
    if (M.rows() != M.cols()) return false;
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + M.cwiseAbs().maxCoeff()))
        return false;
    Eigen::SelfAdjointEigenSolver<Matrix> es(M);
    return es.eigenvalues().minCoeff() > kEigTol;
}

}  // namespace

int ClusterPartition::cluster_of(int i) const {
    if (i < 1 || i > num_nodes())
        throw Error(Error::Code::OutOfRange,
                    "node index " + std::to_string(i) + " outside 1.." +
                        std::to_string(num_nodes()));
    for (int p = 1; p <= num_clusters(); ++p) {
        if (i > boundaries[p - 1] && i <= boundaries[p]) return p;
    }
    throw Error(Error::Code::OutOfRange, "unreachable: bad partition");
}

void ClusterPartition::validate() const {
    if (boundaries.size() < 2 || boundaries.front() != 0)
        throw Error(Error::Code::BadPartition, "partition must start at v_0 = 0");
    for (std::size_t j = 1; j < boundaries.size(); ++j) {
        if (boundaries[j] <= boundaries[j - 1])
            throw Error(Error::Code::BadPartition,
                        "partition boundaries must be strictly increasing");
    }
}

int cluster_of(const ClusterPartition& partition, int i) { return partition.cluster_of(i); }

Vector ActivationSpec::apply(const Vector& x) const {
    Vector y(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) y[j] = apply_scalar(x[j]);
    return y;
}

double ActivationSpec::apply_scalar(double r) const {
    switch (kind) {
        case Kind::Arctan:
            return std::atan(r);
        case Kind::Custom:
            if (!map) throw Error(Error::Code::UnknownActivation, "custom activation has no map");
            return map(r);
    }
    throw Error(Error::Code::UnknownActivation, "unknown activation kind");
}

std::vector<double> lipschitz_bound(const ActivationSpec& activation, int num_clusters) {
    if (activation.kind == ActivationSpec::Kind::Arctan)
        return std::vector<double>(static_cast<std::size_t>(num_clusters), 1.0);
    if (activation.xi.size() == static_cast<std::size_t>(num_clusters)) return activation.xi;
    if (activation.xi.size() == 1)
        return std::vector<double>(static_cast<std::size_t>(num_clusters), activation.xi[0]);
    throw Error(Error::Code::UnknownActivation,
                "custom activation requires a declared Lipschitz constant per cluster");
}

DelayEvaluator DelayEvaluator::constant(double c) {
    DelayEvaluator d;
    d.form = Form::Constant;
    d.c = c;
    d.tau_bar = c;
    d.sigma = 0.0;
    return d;
}

DelayEvaluator DelayEvaluator::logistic(double a) {
    DelayEvaluator d;
    d.form = Form::Logistic;
    d.a = a;
    d.tau_bar = a;        // limit t -> +inf
    d.sigma = a / 4.0;    // tau'(t) maximal at t = 0
    return d;
}

DelayEvaluator DelayEvaluator::tabulated(std::vector<double> times, std::vector<double> values,
                                         double tau_bar, double sigma) {
    DelayEvaluator d;
    d.form = Form::Tabulated;
    d.t_tab = std::move(times);
    d.v_tab = std::move(values);
    d.tau_bar = tau_bar;
    d.sigma = sigma;
    if (d.t_tab.size() != d.v_tab.size() || d.t_tab.size() < 2)
        throw Error(Error::Code::BadArgument, "tabulated delay needs matching time/value tables");
    return d;
}

double DelayEvaluator::tau(double t) const {
    switch (form) {
        case Form::Constant:
            return c;
        case Form::Logistic: {
            // a e^t / (1 + e^t), computed in a form stable for large |t|
            if (t > 0) return a / (1.0 + std::exp(-t));
            double et = std::exp(t);
            return a * et / (1.0 + et);
        }
        case Form::Tabulated: {
            if (t <= t_tab.front()) return v_tab.front();
            if (t >= t_tab.back()) return v_tab.back();
            auto it = std::upper_bound(t_tab.begin(), t_tab.end(), t);
            std::size_t j = static_cast<std::size_t>(it - t_tab.begin());
            double w = (t - t_tab[j - 1]) / (t_tab[j] - t_tab[j - 1]);
            return (1.0 - w) * v_tab[j - 1] + w * v_tab[j];
        }
    }
    throw Error(Error::Code::BadArgument, "unknown delay form");
}

double ValidatedNetwork::xi_max() const {
    return *std::max_element(xi_.begin(), xi_.end());
}

Vector ValidatedNetwork::leader_rhs(int p, const Vector& s_now, const Vector& s_delayed) const {
    const ClusterParams& cp = cluster_params(p);
    const ActivationSpec& act = spec_.activation;
    return -cp.C * s_now + cp.A * act.apply(s_now) + cp.B * act.apply(s_delayed) + cp.I;
}

Matrix ValidatedNetwork::coupled_rhs(double /*t*/, const Matrix& X, const Matrix& X_delayed,
                                     const Matrix& U) const {
    const int N = num_nodes();
    Matrix dX(N, dim());
    const Matrix coupling = spec_.G * X;  // row i: sum_j g_ij x_j
    for (int i = 1; i <= N; ++i) {
        const ClusterParams& cp = cluster_params(cluster_of(i));
        const Vector x = X.row(i - 1).transpose();
        const Vector xd = X_delayed.row(i - 1).transpose();
        dX.row(i - 1) = (-cp.C * x + cp.A * spec_.activation.apply(x) +
                         cp.B * spec_.activation.apply(xd) + cp.I)
                            .transpose() +
                        coupling.row(i - 1) + U.row(i - 1);
    }
    return dX;
}

Matrix ValidatedNetwork::error_rhs(const Matrix& E, const Matrix& E_delayed, const Matrix& S,
                                   const Matrix& S_delayed, const Matrix& U) const {
    const int N = num_nodes();
    Matrix dE(N, dim());
    const Matrix coupling = spec_.G * E;
    for (int i = 1; i <= N; ++i) {
        const int p = cluster_of(i);
        const ClusterParams& cp = cluster_params(p);
        const Vector e = E.row(i - 1).transpose();
        const Vector ed = E_delayed.row(i - 1).transpose();
        const Vector s = S.row(p - 1).transpose();
        const Vector sd = S_delayed.row(p - 1).transpose();
        const Vector F = spec_.activation.apply(e + s) - spec_.activation.apply(s);
        const Vector Fd = spec_.activation.apply(ed + sd) - spec_.activation.apply(sd);
        dE.row(i - 1) = (-cp.C * e + cp.A * F + cp.B * Fd).transpose() + coupling.row(i - 1) +
                        U.row(i - 1);
    }
    return dE;
}

ValidatedNetwork validate_network(const NetworkSpec& spec, bool strict_blocks) {
    spec.partition.validate();
    const int N = spec.partition.num_nodes();
    const int M = spec.partition.num_clusters();

    if (spec.n <= 0) throw Error(Error::Code::ValidationError, "state dimension must be positive");
    if (static_cast<int>(spec.params.size()) != M)
        throw Error(Error::Code::ValidationError, "expected one ClusterParams per cluster");
    if (spec.G.rows() != N || spec.G.cols() != N)
        throw Error(Error::Code::ValidationError, "coupling matrix G must be N x N");

    for (int p = 1; p <= M; ++p) {
        const ClusterParams& cp = spec.params[p - 1];
        if (cp.C.rows() != spec.n || cp.C.cols() != spec.n || cp.A.rows() != spec.n ||
            cp.A.cols() != spec.n || cp.B.rows() != spec.n || cp.B.cols() != spec.n ||
            cp.I.size() != spec.n)
            throw Error(Error::Code::ValidationError,
                        "cluster " + std::to_string(p) + " matrices disagree with n");
        if (!symmetric_positive_definite(cp.C))
            throw Error(Error::Code::NonPositiveDefiniteC,
                        "C of cluster " + std::to_string(p) + " is not symmetric positive definite");
    }

    for (int i = 0; i < N; ++i) {
        double rs = spec.G.row(i).sum();
        if (std::abs(rs) > kRowSumTol) {
            std::ostringstream os;
            os << "row " << (i + 1) << " of G sums to " << rs;
            throw Error(Error::Code::NonZeroRowSum, os.str());
        }
    }

    if (spec.delay.tau_bar <= 0.0)
        throw Error(Error::Code::ValidationError, "tau_bar must be positive");
    if (spec.delay.sigma < 0.0 || spec.delay.sigma >= 1.0)
        throw Error(Error::Code::ValidationError, "sigma must lie in [0, 1)");
    for (int j = 0; j <= 200; ++j) {
        double t = -spec.delay.tau_bar + j * (10.0 + spec.delay.tau_bar) / 200.0;
        double tv = spec.delay.tau(t);
        if (!(tv > 0.0) || tv > spec.delay.tau_bar + 1e-12)
            throw Error(Error::Code::ValidationError,
                        "delay leaves (0, tau_bar] at t = " + std::to_string(t));
    }

    ValidatedNetwork net;
    net.spec_ = spec;
    net.xi_ = lipschitz_bound(spec.activation, M);

    // Block classes of Assumption-2 style partitioned Laplacians. Violations
    // are warnings by default: see strict_blocks.
    const auto& b = spec.partition.boundaries;
    for (int p = 1; p <= M; ++p) {
        for (int q = 1; q <= M; ++q) {
            const Matrix block = spec.G.block(b[p - 1], b[q - 1], b[p] - b[p - 1], b[q] - b[q - 1]);
            for (int r = 0; r < block.rows(); ++r) {
                double rs = block.row(r).sum();
                bool bad_sum = std::abs(rs) > kRowSumTol;
                bool bad_sign = false;
                if (p == q) {
                    for (int c = 0; c < block.cols(); ++c)
                        if (c != r && block(r, c) < -kRowSumTol) bad_sign = true;
                }
                if (bad_sum || bad_sign) {
                    std::ostringstream os;
                    os << "block (" << p << "," << q << ") row " << (r + 1)
                       << (p == q ? " violates class A1" : " violates class A2")
                       << " (row sum " << rs << ")";
                    if (strict_blocks)
                        throw Error(p == q ? Error::Code::ClassA1Violation
                                           : Error::Code::ClassA2Violation,
                                    os.str());
                    net.warnings_.push_back(os.str());
                }
            }
        }
    }
    return net;
}

Matrix error_state(const ClusterPartition& partition, const Matrix& X, const Matrix& S) {
    Matrix E(X.rows(), X.cols());
    for (int i = 1; i <= partition.num_nodes(); ++i)
        E.row(i - 1) = X.row(i - 1) - S.row(partition.cluster_of(i) - 1);
    return E;
}

}  // namespace clustersync
