#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "clustersync/control.hpp"
#include "clustersync/experiment.hpp"

using namespace clustersync;

TEST_CASE("select_pinned_nodes forms (a) and (b)") {
    ClusterPartition part{{0, 3}};
    Vector norms(3);
    norms << 3, 1, 2;

    PinnedSet largest = select_pinned_nodes(norms, part, -0.8, {2});
    CHECK(largest.per_cluster[0] == std::vector<int>{1, 3});

    PinnedSet smallest = select_pinned_nodes(norms, part, 0.5, {1});
    CHECK(smallest.per_cluster[0] == std::vector<int>{2});

    Vector tied(2);
    tied << 3, 3;
    ClusterPartition pair{{0, 2}};
    CHECK(select_pinned_nodes(tied, pair, -0.8, {1}).per_cluster[0] == std::vector<int>{1});

    CHECK_THROWS_AS(select_pinned_nodes(norms, part, -0.8, {4}), Error);
}

TEST_CASE("selection cardinality and dominance") {
    ClusterPartition part{{0, 2, 5}};
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int trial = 0; trial < 500; ++trial) {
        Vector norms(5);
        for (int i = 0; i < 5; ++i) norms[i] = u(rng);
        const double d = (trial % 2 == 0) ? -0.8 : 0.5;
        const std::vector<int> rho{1, 2};
        PinnedSet set = select_pinned_nodes(norms, part, d, rho);
        for (int p = 1; p <= 2; ++p) {
            const auto& sel = set.per_cluster[p - 1];
            REQUIRE(static_cast<int>(sel.size()) == rho[p - 1]);
            for (int i = part.boundaries[p - 1] + 1; i <= part.boundaries[p]; ++i) {
                if (std::find(sel.begin(), sel.end(), i) != sel.end()) continue;
                for (int s : sel) {
                    if (d < 0)
                        CHECK(norms[s - 1] >= norms[i - 1]);
                    else
                        CHECK(norms[s - 1] <= norms[i - 1]);
                }
            }
        }
    }
}

TEST_CASE("impulsive_control_jump") {
    ClusterPartition part{{0, 2, 5}};
    PinningImpulsiveConfig cfg;
    cfg.gains = {-0.8};
    cfg.rho = {1, 3};

    Matrix zeros = Matrix::Zero(5, 2);
    CHECK((impulsive_control_jump(zeros, part, cfg, 1) - zeros).cwiseAbs().maxCoeff() == 0.0);

    Matrix E(5, 2);
    E << 9.6, -5.6, 1.0, 0.5, 7.6, -6.6, 7.0, -6.0, 6.5, -5.5;
    PinnedSet selected;
    const Matrix out = impulsive_control_jump(E, part, cfg, 1, &selected);
    CHECK(selected.per_cluster[0] == std::vector<int>{1});  // larger error in cluster 1
    CHECK(selected.per_cluster[1] == std::vector<int>{3, 4, 5});
    for (int i : {3, 4, 5})
        CHECK(out.row(i - 1).norm() == doctest::Approx(0.2 * E.row(i - 1).norm()).epsilon(1e-12));
    CHECK((out.row(1) - E.row(1)).norm() == doctest::Approx(0.0));

    cfg.gains = {-1.0};
    CHECK(impulsive_control_jump(E, part, cfg, 1).row(0).norm() == doctest::Approx(0.0));

    cfg.gains = {-0.8};
    cfg.fixed_nodes = std::vector<int>{2, 3};
    const Matrix fixed = impulsive_control_jump(E, part, cfg, 1);
    CHECK(fixed.row(1).norm() == doctest::Approx(0.2 * E.row(1).norm()).epsilon(1e-12));
    CHECK((fixed.row(0) - E.row(0)).norm() == doctest::Approx(0.0));
}

TEST_CASE("gain sequences") {
    PinningImpulsiveConfig cfg;
    cfg.gains = {-0.8};
    CHECK(cfg.gain_at(1) == doctest::Approx(-0.8));
    CHECK(cfg.gain_at(50) == doctest::Approx(-0.8));
    cfg.gains = {-0.8, -0.5};
    CHECK(cfg.gain_at(2) == doctest::Approx(-0.5));
    CHECK_THROWS_AS(cfg.gain_at(3), Error);
}

TEST_CASE("psi guard") {
    Vector e(2);
    e << 1, 0;
    const Vector v = psi(e, 2.0, 1e-10);
    CHECK(v[0] == doctest::Approx(0.25));
    CHECK(v[1] == doctest::Approx(0.0));
    CHECK(psi(e, 0.0, 1e-10).norm() == doctest::Approx(0.0));
    CHECK(psi(e, 0.5e-10, 1e-10).norm() == doctest::Approx(0.0));
}

TEST_CASE("psi stack identity") {
    std::mt19937 rng(23);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 500; ++trial) {
        Matrix E(5, 2);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 2; ++j) E(i, j) = g(rng);
        const double norm_e = std::sqrt(E.squaredNorm());
        if (norm_e <= 1e-6) continue;
        double dot = 0.0;
        for (int i = 0; i < 5; ++i)
            dot += E.row(i) * psi(E.row(i).transpose(), norm_e, 1e-10);
        CHECK(std::abs(dot - 1.0) < 1e-10);
    }
}

TEST_CASE("hybrid control input") {
    HybridConfig cfg;  // k = 2, k1 = 1.4, g1 = 41.4, mu = 0.5

    Vector zero = Vector::Zero(2);
    CHECK(hybrid_control_input(true, zero, 0.0, 0.0, 0.0, cfg).norm() == doctest::Approx(0.0));

    Vector e(2);
    e << 1, -1;
    const Vector u = hybrid_control_input(true, e, std::sqrt(2.0), 0.0, 0.0, cfg);
    CHECK(u[0] == doctest::Approx(-43.4));
    CHECK(u[1] == doctest::Approx(43.4));

    HybridConfig small = cfg;
    small.g1 = 1.0;
    Vector e2(2);
    e2 << 1, 0;
    const Vector u2 = hybrid_control_input(false, e2, 1.0, 0.0, 1.0, small);
    CHECK(u2[0] == doctest::Approx(-6.0));
    CHECK(u2[1] == doctest::Approx(0.0));
}

TEST_CASE("power term is dissipative and the input vanishes at the origin") {
    HybridConfig cfg;
    std::mt19937 rng(29);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 500; ++trial) {
        Vector e(3);
        for (int j = 0; j < 3; ++j) e[j] = g(rng);
        // e^T (k sign(e) |e|^mu) = k sum |e_j|^{1+mu} >= 0
        const Vector u = hybrid_control_input(false, e, e.norm(), 0.0, 0.0, cfg);
        double expected = 0.0;
        for (int j = 0; j < 3; ++j) expected += cfg.k * std::pow(std::abs(e[j]), 1.0 + cfg.mu_exp);
        CHECK(-e.dot(u) >= -1e-12);
        if (e.norm() <= cfg.psi_epsilon) CHECK(-e.dot(u) == doctest::Approx(expected));
    }

    // continuity at zero: shrink everything, ||u|| -> 0
    Vector dir(2);
    dir << 3, -4;
    double prev = 1e300;
    for (double scale : {1e-4, 1e-6, 1e-8, 1e-10}) {
        const Vector e = scale * dir;
        const double nu = hybrid_control_input(false, e, e.norm(), 0.0, 0.0, cfg).norm();
        CHECK(nu < prev);
        prev = nu;
    }
    CHECK(prev < 1e-4);
}

TEST_CASE("derive_boundary_nodes") {
    ExperimentConfig cfg = make_preset("case1");
    // every row of the example's G couples across clusters
    CHECK(derive_boundary_nodes(cfg.network.G, cfg.network.partition) ==
          std::vector<int>{1, 2, 3, 4, 5});

    Matrix G(4, 4);
    G << -1, 0, 1, 0,
          0, 0, 0, 0,
          1, 0, -1, 0,
          0, 0, 0, 0;
    ClusterPartition part{{0, 2, 4}};
    CHECK(derive_boundary_nodes(G, part) == std::vector<int>{1, 3});
}

TEST_CASE("forward_integral_estimate") {
    CHECK(forward_integral_estimate(nullptr, 1, 0.0, 1.0, FutureMode::ZeroFuture) ==
          doctest::Approx(0.0));
    CHECK_THROWS_AS(forward_integral_estimate(nullptr, 1, 0.0, 1.0, FutureMode::Iterative), Error);

    Trajectory prev;
    prev.tau_bar = 1.0;
    for (int s = 0; s <= 1000; ++s) {
        prev.times.push_back(s * 1e-3);
        prev.limit.push_back('-');
        prev.errors.push_back(Matrix::Ones(1, 1));
        prev.err_sq.push_back(Vector::Ones(1));
        prev.V.push_back(1.0);
    }
    prev.initial_err_sq = Vector::Ones(1);

    CHECK(forward_integral_estimate(&prev, 1, 0.3, 0.8, FutureMode::Iterative) ==
          doctest::Approx(0.5).epsilon(1e-6));
    CHECK(forward_integral_estimate(&prev, 1, 0.9, 0.8, FutureMode::Iterative) ==
          doctest::Approx(0.0));

    Trajectory quiet = prev;
    for (auto& e : quiet.errors) e.setZero();
    for (auto& v : quiet.err_sq) v.setZero();
    quiet.initial_err_sq.setZero();
    CHECK(forward_integral_estimate(&quiet, 1, 0.3, 0.8, FutureMode::Iterative) ==
          doctest::Approx(0.0));
}
