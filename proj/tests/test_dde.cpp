#include <doctest.h>

#include <cmath>
#include <random>

#include "clustersync/experiment.hpp"
#include "clustersync/simulate.hpp"

using namespace clustersync;

namespace {

Matrix scalar(double v) {
    Matrix m(1, 1);
    m << v;
    return m;
}

}  // namespace

TEST_CASE("history buffer sampling") {
    HistoryBuffer constant(0.0, 2.0, scalar(3.0));
    CHECK(constant.sample(-1.5)(0, 0) == doctest::Approx(3.0));
    CHECK(constant.sample(0.0)(0, 0) == doctest::Approx(3.0));

    HistoryBuffer h(0.0, 1.0, scalar(0.0));
    h.append(1.0, scalar(2.0));
    CHECK(h.sample(0.5)(0, 0) == doctest::Approx(1.0));

    // jump at t = 1: left limit 2, right limit 0.4
    h.append_right_limit(1.0, scalar(0.4));
    h.append(2.0, scalar(0.4));
    CHECK(h.sample(1.0)(0, 0) == doctest::Approx(2.0));
    CHECK(h.sample(1.0, Side::Right)(0, 0) == doctest::Approx(0.4));

    CHECK_THROWS_AS(h.sample(-5.0), Error);
    CHECK_THROWS_AS(h.sample(3.0), Error);
}

TEST_CASE("rk4 single step") {
    HistoryBuffer buf(0.0, 1.0, scalar(1.0));
    RhsFn decay = [](double, const Matrix& y, const HistoryBuffer&) -> Matrix { return -y; };
    const Matrix next = rk4_step(decay, buf, 0.0, 0.1, scalar(1.0));
    CHECK(next(0, 0) == doctest::Approx(std::exp(-0.1)).epsilon(1e-6));

    RhsFn zero = [](double, const Matrix& y, const HistoryBuffer&) -> Matrix {
        return Matrix::Zero(y.rows(), y.cols());
    };
    CHECK(rk4_step(zero, buf, 0.0, 0.1, scalar(4.2))(0, 0) == doctest::Approx(4.2));
}

TEST_CASE("delayed scalar test problem follows the method-of-steps closed form") {
    // x'(t) = -x(t-1), constant history 1 -> x(t) = 1 - t on [0, 1]
    const double h = 1e-3;
    HistoryBuffer buf(0.0, 1.0, scalar(1.0));
    RhsFn rhs = [](double t, const Matrix&, const HistoryBuffer& b) -> Matrix {
        return -b.sample(t - 1.0);
    };
    Matrix x = scalar(1.0);
    int half_step = -1;
    for (int s = 0; s < 1000; ++s) {
        x = rk4_step(rhs, buf, s * h, h, x);
        buf.append((s + 1) * h, x);
        if ((s + 1) * h == 0.5) half_step = s + 1;
    }
    CHECK(buf.sample(0.5)(0, 0) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(std::abs(x(0, 0)) < 1e-6);
    CHECK(half_step == 500);
}

TEST_CASE("rk4 order on a smooth problem") {
    auto endpoint_error = [](double h) {
        HistoryBuffer buf(0.0, 1.0, scalar(1.0));
        RhsFn decay = [](double, const Matrix& y, const HistoryBuffer&) -> Matrix { return -y; };
        Matrix x = scalar(1.0);
        const int steps = static_cast<int>(std::llround(1.0 / h));
        for (int s = 0; s < steps; ++s) x = rk4_step(decay, buf, s * h, h, x);
        return std::abs(x(0, 0) - std::exp(-1.0));
    };
    const double ratio = endpoint_error(1e-2) / endpoint_error(5e-3);
    CHECK(ratio >= 12.0);
    CHECK(ratio <= 20.0);
}

TEST_CASE("apply_impulse_event") {
    Matrix E(2, 2);
    E << 10, -5, 1, 1;
    const Matrix out = apply_impulse_event(E, {1}, -0.8);
    CHECK(out(0, 0) == doctest::Approx(2.0));
    CHECK(out(0, 1) == doctest::Approx(-1.0));
    CHECK(out(1, 0) == doctest::Approx(1.0));  // unpinned row untouched
    CHECK(apply_impulse_event(E, {1}, -1.0).row(0).norm() == doctest::Approx(0.0));
    CHECK_THROWS_AS(apply_impulse_event(E, {3}, -0.5), Error);
}

TEST_CASE("impulse norm identity") {
    std::mt19937 rng(5);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> du(-1.9, 1.5);
    for (int trial = 0; trial < 200; ++trial) {
        Matrix E(4, 3);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 3; ++j) E(i, j) = g(rng);
        const double d = du(rng);
        const Matrix out = apply_impulse_event(E, {2, 4}, d);
        for (int i : {2, 4})
            CHECK(out.row(i - 1).norm() ==
                  doctest::Approx(std::abs(1.0 + d) * E.row(i - 1).norm()).epsilon(1e-12));
    }
}

TEST_CASE("impulse schedule") {
    ImpulseSchedule s = ImpulseSchedule::arithmetic(0.03, 0.1);
    REQUIRE(s.times.size() == 3);
    CHECK(s.times[0] == doctest::Approx(0.03));
    CHECK(s.times[2] == doctest::Approx(0.09));
    CHECK_THROWS_AS(ImpulseSchedule::explicit_times({0.2, 0.1}), Error);
    CHECK_THROWS_AS(ImpulseSchedule::arithmetic(-1.0, 1.0), Error);
}

TEST_CASE("running_integral") {
    // build a synthetic trajectory on [0, 2] with channel e^T e = t for node 1
    Trajectory traj;
    traj.tau_bar = 1.0;
    const double h = 1e-3;
    for (int s = 0; s <= 2000; ++s) {
        const double t = s * h;
        traj.times.push_back(t);
        traj.limit.push_back('-');
        Matrix e(2, 1);
        e << std::sqrt(t), 0.0;
        traj.errors.push_back(e);
        Vector sq(2);
        sq << t, 0.0;
        traj.err_sq.push_back(sq);
        traj.V.push_back(t);
    }
    traj.initial_err_sq = Vector::Zero(2);

    CHECK(running_integral(traj, 2, 2.0, 1.0) == doctest::Approx(0.0));               // e == 0
    CHECK(running_integral(traj, 1, 2.0, 1.0) == doctest::Approx(1.5).epsilon(1e-6)); // int_1^2 s ds
    // trapezoid is exact on degree <= 1 integrands, including off-grid endpoints
    CHECK(std::abs(running_integral(traj, 1, 1.7005, 0.4031) -
                   (1.7005 * 1.7005 - (1.7005 - 0.4031) * (1.7005 - 0.4031)) / 2.0) < 1e-10);

    // constant channel 1, tau = 0.5
    Trajectory flat;
    flat.tau_bar = 1.0;
    for (int s = 0; s <= 1000; ++s) {
        flat.times.push_back(s * h);
        flat.limit.push_back('-');
        flat.errors.push_back(Matrix::Ones(1, 1));
        flat.err_sq.push_back(Vector::Ones(1));
        flat.V.push_back(1.0);
    }
    flat.initial_err_sq = Vector::Ones(1);
    CHECK(running_integral(flat, 1, 1.0, 0.5) == doctest::Approx(0.5).epsilon(1e-6));
    // reaches into the constant pre-history below t = 0
    CHECK(running_integral(flat, 1, 0.2, 0.7) == doctest::Approx(0.7).epsilon(1e-6));
}

TEST_CASE("zero initial error stays zero without control") {
    ExperimentConfig cfg = make_preset("case1");
    ValidatedNetwork net = validate_network(cfg.network);
    Matrix X0(5, 2);
    for (int i = 1; i <= 5; ++i)
        X0.row(i - 1) = cfg.S0.row(cfg.network.partition.cluster_of(i) - 1);
    IntegratorConfig ic;
    ic.h = 1e-3;
    ic.T = 1.0;
    Trajectory traj = integrate(net, NoController{}, ic, InitialState{X0, cfg.S0});
    double worst = 0.0;
    for (std::size_t r = 0; r < traj.size(); ++r) worst = std::max(worst, traj.max_error_norm(r));
    CHECK(worst < 1e-10);
}

TEST_CASE("misaligned impulses are rejected") {
    ExperimentConfig cfg = make_preset("case2");
    auto& pin = std::get<PinningImpulsiveConfig>(cfg.controller);
    pin.schedule = ImpulseSchedule::explicit_times({0.0155});
    ValidatedNetwork net = validate_network(cfg.network);
    IntegratorConfig ic;
    ic.h = 1e-3;
    ic.T = 0.1;
    try {
        integrate(net, cfg.controller, ic, InitialState{cfg.X0, cfg.S0});
        FAIL("expected MisalignedImpulse");
    } catch (const Error& e) {
        CHECK(e.code() == Error::Code::MisalignedImpulse);
    }
}

TEST_CASE("integration is deterministic") {
    ExperimentConfig cfg = make_preset("case2");
    cfg.integrator.T = 0.5;
    ValidatedNetwork net = validate_network(cfg.network);
    Trajectory a = integrate(net, cfg.controller, cfg.integrator, InitialState{cfg.X0, cfg.S0});
    Trajectory b = integrate(net, cfg.controller, cfg.integrator, InitialState{cfg.X0, cfg.S0});
    REQUIRE(a.size() == b.size());
    for (std::size_t r = 0; r < a.size(); ++r) {
        CHECK(a.times[r] == b.times[r]);
        CHECK((a.errors[r] - b.errors[r]).cwiseAbs().maxCoeff() == 0.0);
        CHECK(a.V[r] == b.V[r]);
    }
}

TEST_CASE("impulse records carry right limits") {
    ExperimentConfig cfg = make_preset("case2");
    cfg.integrator.T = 0.06;
    ValidatedNetwork net = validate_network(cfg.network);
    Trajectory traj = integrate(net, cfg.controller, cfg.integrator, InitialState{cfg.X0, cfg.S0});
    REQUIRE(traj.impulses.size() == 2);
    CHECK(traj.impulses[0].t == doctest::Approx(0.03));
    CHECK(traj.impulses[0].d_k == doctest::Approx(-0.8));
    CHECK(traj.impulses[0].pinned.size() == 4);  // rho = (1, 3)

    // both limit rows present at the impulse instant, errors contracted
    bool found = false;
    for (std::size_t r = 0; r + 1 < traj.size(); ++r) {
        if (traj.times[r] == traj.times[r + 1]) {
            CHECK(traj.limit[r] == '-');
            CHECK(traj.limit[r + 1] == '+');
            for (int i : traj.impulses[0].pinned)
                CHECK(traj.errors[r + 1].row(i - 1).norm() ==
                      doctest::Approx(0.2 * traj.errors[r].row(i - 1).norm()).epsilon(1e-12));
            found = true;
            break;
        }
    }
    CHECK(found);
}
