#include "clustersync/dde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace clustersync {

namespace {
constexpr double kCoverageEps = 1e-9;
}

HistoryBuffer::HistoryBuffer(double t0, double coverage, Matrix initial) {
    if (coverage <= 0) throw Error(Error::Code::BadArgument, "history coverage must be positive");
    times_ = {t0 - coverage, t0};
    values_ = {initial, std::move(initial)};
}

void HistoryBuffer::append(double t, Matrix value) {
    if (t <= times_.back())
        throw Error(Error::Code::BadArgument, "history stamps must be strictly increasing");
    times_.push_back(t);
    values_.push_back(std::move(value));
}

void HistoryBuffer::append_right_limit(double t, Matrix value) {
    if (t != times_.back())
        throw Error(Error::Code::BadArgument, "right limit must duplicate the latest stamp");
    times_.push_back(t);
    values_.push_back(std::move(value));
}

Matrix HistoryBuffer::sample(double t, Side side) const {
    if (t < times_.front() - kCoverageEps || t > times_.back() + kCoverageEps) {
        std::ostringstream os;
        os << "history query at t = " << t << " outside [" << times_.front() << ", "
           << times_.back() << "]";
        throw Error(Error::Code::OutOfCoverage, os.str());
    }
    t = std::clamp(t, times_.front(), times_.back());

    if (side == Side::Left) {
        auto it = std::lower_bound(times_.begin(), times_.end(), t);
        std::size_t idx = static_cast<std::size_t>(it - times_.begin());
        if (idx < times_.size() && times_[idx] == t) return values_[idx];
        // strictly between idx-1 and idx
        double w = (t - times_[idx - 1]) / (times_[idx] - times_[idx - 1]);
        return (1.0 - w) * values_[idx - 1] + w * values_[idx];
    }
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t idx = static_cast<std::size_t>(it - times_.begin());
    if (idx > 0 && times_[idx - 1] == t) return values_[idx - 1];
    double w = (t - times_[idx - 1]) / (times_[idx] - times_[idx - 1]);
    return (1.0 - w) * values_[idx - 1] + w * values_[idx];
}

Matrix sample_history(const HistoryBuffer& buffer, double t, Side side) {
    return buffer.sample(t, side);
}

ImpulseSchedule ImpulseSchedule::arithmetic(double delta, double horizon) {
    if (delta <= 0) throw Error(Error::Code::BadArgument, "impulse gap must be positive");
    ImpulseSchedule s;
    for (int k = 1; k * delta <= horizon + 1e-12; ++k) s.times.push_back(k * delta);
    return s;
}

ImpulseSchedule ImpulseSchedule::explicit_times(std::vector<double> times) {
    ImpulseSchedule s;
    s.times = std::move(times);
    s.validate();
    return s;
}

void ImpulseSchedule::validate() const {
    double prev = 0.0;
    for (double t : times) {
        if (t <= prev)
            throw Error(Error::Code::BadArgument,
                        "impulse times must be strictly increasing and positive");
        prev = t;
    }
}

Matrix rk4_step(const RhsFn& rhs, const HistoryBuffer& buffer, double t, double h,
                const Matrix& y) {
    const Matrix k1 = rhs(t, y, buffer);
    const Matrix k2 = rhs(t + h / 2, y + (h / 2) * k1, buffer);
    const Matrix k3 = rhs(t + h / 2, y + (h / 2) * k2, buffer);
    const Matrix k4 = rhs(t + h, y + h * k3, buffer);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Matrix apply_impulse_event(const Matrix& E, const std::vector<int>& pinned, double d_k) {
    Matrix out = E;
    for (int i : pinned) {
        if (i < 1 || i > E.rows())
            throw Error(Error::Code::OutOfRange, "pinned node " + std::to_string(i));
        out.row(i - 1) *= (1.0 + d_k);
    }
    return out;
}

double Trajectory::max_error_norm(std::size_t idx) const {
    return errors.at(idx).rowwise().norm().maxCoeff();
}

double running_integral(const Trajectory& traj, int node, double t, double tau_at_t) {
    if (traj.times.empty()) throw Error(Error::Code::OutOfCoverage, "empty trajectory");
    const int i = node - 1;
    if (i < 0 || i >= traj.initial_err_sq.size())
        throw Error(Error::Code::OutOfRange, "node " + std::to_string(node));
    const double t0 = traj.times.front();
    const double lo = t - tau_at_t;
    if (t > traj.times.back() + 1e-9 || lo < t0 - traj.tau_bar - 1e-9)
        throw Error(Error::Code::OutOfCoverage, "integral endpoints outside coverage");

    // cumulative trapezoid of the channel from t0 up to s (s clamped to grid)
    auto cum_from_start = [&](double s) -> double {
        if (s <= t0) return 0.0;
        s = std::min(s, traj.times.back());
        double acc = 0.0;
        for (std::size_t j = 0; j + 1 < traj.times.size(); ++j) {
            double a = traj.times[j], b = traj.times[j + 1];
            double fa = traj.err_sq[j][i], fb = traj.err_sq[j + 1][i];
            if (s >= b) {
                acc += (b - a) * 0.5 * (fa + fb);
            } else {
                if (s > a) {
                    double w = (s - a) / (b - a);
                    double fs = (1.0 - w) * fa + w * fb;
                    acc += (s - a) * 0.5 * (fa + fs);
                }
                break;
            }
        }
        return acc;
    };

    double total = cum_from_start(t) - cum_from_start(std::max(lo, t0));
    if (lo < t0) total += (t0 - lo) * traj.initial_err_sq[i];
    return total;
}

}  // namespace clustersync
