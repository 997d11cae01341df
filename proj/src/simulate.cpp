#include "clustersync/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace clustersync {

namespace {

// Online prefix integral of the per-node e_i^T e_i channel on the committed
// grid, extendable past the last committed stamp for intra-step stage queries.
class IntegralTracker {
public:
    IntegralTracker(Vector f_init, double tau_bar)
        : f_init_(std::move(f_init)), tau_bar_(tau_bar) {
        ts_.push_back(0.0);
        fsq_.push_back(f_init_);
        cum_.push_back(Vector::Zero(f_init_.size()));
    }

    void commit(double t, const Vector& f) {
        const double w = t - ts_.back();
        cum_.push_back(cum_.back() + w * 0.5 * (fsq_.back() + f));
        ts_.push_back(t);
        fsq_.push_back(f);
    }

    // duplicate stamp at a jump; zero-width segment
    void commit_jump(double t, const Vector& f) {
        cum_.push_back(cum_.back());
        ts_.push_back(t);
        fsq_.push_back(f);
    }

    Vector cum_from_zero(double s, const Vector& f_now) const {
        const Eigen::Index N = f_init_.size();
        if (s <= 0.0) return Vector::Zero(N);
        if (s >= ts_.back())
            return cum_.back() + (s - ts_.back()) * 0.5 * (fsq_.back() + f_now);
        auto it = std::upper_bound(ts_.begin(), ts_.end(), s);
        std::size_t j = static_cast<std::size_t>(it - ts_.begin()) - 1;
        double a = ts_[j], b = ts_[j + 1];
        if (b == a) return cum_[j + 1];
        double w = (s - a) / (b - a);
        Vector fs = (1.0 - w) * fsq_[j] + w * fsq_[j + 1];
        return cum_[j] + (s - a) * 0.5 * (fsq_[j] + fs);
    }

    // integral of the channel over [t - tau, t]
    Vector delayed_integral(double t, double tau, const Vector& f_now) const {
        const double lo = t - tau;
        Vector out = cum_from_zero(t, f_now) - cum_from_zero(std::max(lo, 0.0), f_now);
        if (lo < 0.0) out += (-lo) * f_init_;
        return out;
    }

private:
    Vector f_init_;
    double tau_bar_;
    std::vector<double> ts_;
    std::vector<Vector> fsq_;
    std::vector<Vector> cum_;
};

Vector row_norms_sq(const Matrix& E) { return E.rowwise().squaredNorm(); }

}  // namespace

Trajectory integrate(const ValidatedNetwork& net, const ControllerSpec& controller,
                     const IntegratorConfig& cfg, const InitialState& init,
                     const Trajectory* previous_pass) {
    const int N = net.num_nodes();
    const int M = net.num_clusters();
    const int n = net.dim();
    if (init.X0.rows() != N || init.X0.cols() != n || init.S0.rows() != M || init.S0.cols() != n)
        throw Error(Error::Code::BadArgument, "initial state dimensions disagree with network");
    if (cfg.h <= 0 || cfg.T <= 0)
        throw Error(Error::Code::BadArgument, "step and horizon must be positive");

    const DelayEvaluator& delay = net.spec().delay;
    const double tau_bar = delay.tau_bar;
    const int nsteps = static_cast<int>(std::llround(cfg.T / cfg.h));

    const auto* pinning = std::get_if<PinningImpulsiveConfig>(&controller);
    const auto* hybrid = std::get_if<HybridConfig>(&controller);

    // impulse instants mapped to grid steps
    std::map<int, int> impulse_at_step;  // step index -> impulse counter k
    if (pinning) {
        pinning->schedule.validate();
        int k = 0;
        for (double tk : pinning->schedule.times) {
            ++k;
            if (tk > cfg.T + 1e-12) break;
            double m = tk / cfg.h;
            long step = std::llround(m);
            if (std::abs(m - static_cast<double>(step)) > 1e-6)
                throw Error(Error::Code::MisalignedImpulse,
                            "impulse at t = " + std::to_string(tk) +
                                " does not land on the step grid");
            impulse_at_step[static_cast<int>(step)] = k;
        }
    }

    std::vector<bool> boundary(static_cast<std::size_t>(N), false);
    if (hybrid) {
        std::vector<int> chi = hybrid->chi ? *hybrid->chi
                                           : derive_boundary_nodes(net.spec().G, net.spec().partition);
        for (int i : chi) {
            if (i < 1 || i > N) throw Error(Error::Code::OutOfRange, "chi node out of range");
            boundary[static_cast<std::size_t>(i - 1)] = true;
        }
    }

    // joint state: error rows then leader rows
    Matrix Y0(N + M, n);
    Y0.topRows(N) = error_state(net.spec().partition, init.X0, init.S0);
    Y0.bottomRows(M) = init.S0;

    HistoryBuffer hist(0.0, tau_bar, Y0);
    IntegralTracker tracker(row_norms_sq(Y0.topRows(N)), tau_bar);

    auto forward_term = [&](double t, int node) -> double {
        if (!hybrid || hybrid->future_mode == FutureMode::ZeroFuture || !previous_pass) return 0.0;
        return forward_integral_estimate(previous_pass, node, t, hybrid->t1_estimate,
                                         hybrid->future_mode);
    };

    RhsFn rhs = [&](double t, const Matrix& Y, const HistoryBuffer& buffer) -> Matrix {
        const Matrix Yd = buffer.sample(t - delay.tau(t));
        const Matrix E = Y.topRows(N);
        const Matrix S = Y.bottomRows(M);
        const Matrix Ed = Yd.topRows(N);
        const Matrix Sd = Yd.bottomRows(M);

        Matrix U = Matrix::Zero(N, n);
        if (hybrid) {
            const Vector esq = row_norms_sq(E);
            const double norm_e = std::sqrt(esq.sum());
            const Vector I_tau = tracker.delayed_integral(t, delay.tau(t), esq);
            for (int i = 1; i <= N; ++i) {
                U.row(i - 1) = hybrid_control_input(boundary[static_cast<std::size_t>(i - 1)],
                                                    E.row(i - 1).transpose(), norm_e,
                                                    I_tau[i - 1], forward_term(t, i), *hybrid)
                                   .transpose();
            }
        }

        Matrix dY(N + M, n);
        dY.topRows(N) = net.error_rhs(E, Ed, S, Sd, U);
        for (int p = 1; p <= M; ++p)
            dY.row(N + p - 1) =
                net.leader_rhs(p, S.row(p - 1).transpose(), Sd.row(p - 1).transpose()).transpose();
        return dY;
    };

    Trajectory traj;
    traj.tau_bar = tau_bar;
    traj.initial_err_sq = row_norms_sq(Y0.topRows(N));

    auto lyapunov = [&](double t, const Matrix& E) -> double {
        const Vector esq = row_norms_sq(E);
        if (!hybrid) return esq.sum();
        const Vector I_tau = tracker.delayed_integral(t, delay.tau(t), esq);
        double v = 0.5 * esq.sum() + 0.5 * hybrid->k1 * I_tau.sum();
        for (int i = 1; i <= N; ++i)
            if (!boundary[static_cast<std::size_t>(i - 1)])
                v += hybrid->g1 * forward_term(t, i);
        return v;
    };

    auto record = [&](double t, char limit, const Matrix& Y) {
        traj.times.push_back(t);
        traj.limit.push_back(limit);
        traj.errors.push_back(Y.topRows(N));
        traj.leaders.push_back(Y.bottomRows(M));
        traj.err_sq.push_back(row_norms_sq(Y.topRows(N)));
        traj.V.push_back(lyapunov(t, Y.topRows(N)));
    };

    Matrix Y = Y0;
    record(0.0, '-', Y);

    for (int step = 0; step < nsteps; ++step) {
        const double t = step * cfg.h;
        const double t_next = (step + 1) * cfg.h;
        Y = rk4_step(rhs, hist, t, cfg.h, Y);
        hist.append(t_next, Y);
        tracker.commit(t_next, row_norms_sq(Y.topRows(N)));
        record(t_next, '-', Y);

        auto it = impulse_at_step.find(step + 1);
        if (it != impulse_at_step.end()) {
            const int k = it->second;
            PinnedSet selected;
            const Matrix E_plus =
                impulsive_control_jump(Y.topRows(N), net.spec().partition, *pinning, k, &selected);
            Y.topRows(N) = E_plus;
            hist.append_right_limit(t_next, Y);
            tracker.commit_jump(t_next, row_norms_sq(Y.topRows(N)));
            record(t_next, '+', Y);
            traj.impulses.push_back({t_next, selected.flatten(), pinning->gain_at(k)});
        }
    }
    return traj;
}

}  // namespace clustersync
