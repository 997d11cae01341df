#pragma once

#include <functional>
#include <vector>

#include "clustersync/network.hpp"

namespace clustersync {

enum class Side { Left, Right };

/// Interpolable record of past states. Jump instants carry two stamps with the
/// same time: the earlier one holds the left limit, the later the right limit.
class HistoryBuffer {
public:
    /// Constant history `initial` on [t0 - coverage, t0].
    HistoryBuffer(double t0, double coverage, Matrix initial);

    void append(double t, Matrix value);
    void append_right_limit(double t, Matrix value);

    Matrix sample(double t, Side side = Side::Left) const;

    double t_begin() const { return times_.front(); }
    double t_end() const { return times_.back(); }

private:
    std::vector<double> times_;
    std::vector<Matrix> values_;
};

Matrix sample_history(const HistoryBuffer& buffer, double t, Side side = Side::Left);

/// Strictly increasing impulse instants t_1 < t_2 < ...
struct ImpulseSchedule {
    std::vector<double> times;

    static ImpulseSchedule arithmetic(double delta, double horizon);
    static ImpulseSchedule explicit_times(std::vector<double> times);

    void validate() const;
};

struct IntegratorConfig {
    double h = 1e-3;
    double T = 5.0;
    bool align_impulses = true;
};

using RhsFn = std::function<Matrix(double, const Matrix&, const HistoryBuffer&)>;

/// One classical 4-stage Runge-Kutta step; delayed terms inside `rhs` read the
/// buffer at the stage times.
Matrix rk4_step(const RhsFn& rhs, const HistoryBuffer& buffer, double t, double h,
                const Matrix& y);

/// Scales the pinned rows of E by (1 + d_k). Node indices are 1-based.
Matrix apply_impulse_event(const Matrix& E, const std::vector<int>& pinned, double d_k);

struct ImpulseRecord {
    double t = 0;
    std::vector<int> pinned;  // 1-based node indices
    double d_k = 0;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<char> limit;        // '-' per step, '+' for post-impulse rows
    std::vector<Matrix> errors;     // N x n per record
    std::vector<Matrix> leaders;    // M x n per record
    std::vector<Vector> err_sq;     // e_i^T e_i per node
    std::vector<double> V;          // Lyapunov value per record
    std::vector<ImpulseRecord> impulses;

    Vector initial_err_sq;          // channel value on the constant history
    double tau_bar = 0;

    std::size_t size() const { return times.size(); }
    Vector error_norms(std::size_t idx) const { return errors.at(idx).rowwise().norm(); }
    double max_error_norm(std::size_t idx) const;
};

/// Integral of e_i^T e_i over [t - tau_at_t, t], trapezoid on the recorded
/// grid with the constant initial history extending the channel below t = 0.
double running_integral(const Trajectory& trajectory, int node, double t, double tau_at_t);

}  // namespace clustersync
