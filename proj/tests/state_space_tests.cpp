#include "doctest.h"

#include <cmath>

#include "graphem/state_space.hpp"
#include "oracles.hpp"

using namespace graphem;

TEST_CASE("stability projection rescales to the target singular value") {
    Matrix single(1, 1);
    single << 2.0;
    Matrix projected = project_to_stable(single);
    CHECK(projected(0, 0) == doctest::Approx(0.99).epsilon(1e-15));

    // already-stable input passes through untouched
    Matrix small(1, 1);
    small << 0.4;
    CHECK(project_to_stable(small)(0, 0) == 0.4);
}

TEST_CASE("block transition has the declared sparsity pattern") {
    BlockSpec spec{{3, 3, 3}, {0.1, 0.1, 1e-4}};
    Rng rng(7);
    Matrix a = generate_block_transition(spec, rng);
    REQUIRE(a.rows() == 9);
    REQUIRE(a.cols() == 9);

    int structural = 0;
    for (int r = 0; r < 9; ++r) {
        for (int c = 0; c < 9; ++c) {
            const bool in_block = (r / 3) == (c / 3);
            if (in_block) {
                ++structural;
            } else {
                CHECK(a(r, c) == 0.0);  // off-block entries exactly zero
            }
        }
    }
    CHECK(structural == 27);
}

TEST_CASE("generated transitions are stable across seeds") {
    BlockSpec spec{{3, 5, 5, 3}, {1.0, 1.0, 1e-4}};
    for (unsigned seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        Matrix a = generate_block_transition(spec, rng);
        CHECK(max_singular_value(a) < 1.0);
    }
}

TEST_CASE("empty block list is rejected") {
    BlockSpec spec{{}, {1.0, 1.0, 1.0}};
    Rng rng(0);
    CHECK_THROWS_AS(generate_block_transition(spec, rng),
                    std::invalid_argument);
}

TEST_CASE("noiseless identity model is a fixed point") {
    const int n = 3;
    StateSpaceModel model;
    model.A = Matrix::Identity(n, n);
    model.H = Matrix::Identity(n, n);
    model.Q = Matrix::Zero(n, n);
    model.R = Matrix::Zero(n, n);
    model.P0 = Matrix::Zero(n, n);
    model.x0_mean = Vector(n);
    model.x0_mean << 1.5, -2.0, 0.25;

    Rng rng(3);
    Trajectory traj = simulate(model, 10, rng);
    REQUIRE(traj.length() == 10);
    for (const Vector& y : traj.observations) {
        CHECK(testing::exactly_equal(y, model.x0_mean));  // exact, no noise drawn
    }
}

TEST_CASE("A = 0 state covariance converges to Q") {
    const int n = 2;
    StateSpaceModel model;
    model.A = Matrix::Zero(n, n);
    model.H = Matrix::Identity(n, n);
    model.Q = Matrix::Identity(n, n);
    model.R = Matrix::Zero(n, n);
    model.P0 = Matrix::Identity(n, n);
    model.x0_mean = Vector::Zero(n);

    const int steps = 100000;
    Rng rng(11);
    Trajectory traj = simulate(model, steps, rng);

    Matrix cov = Matrix::Zero(n, n);
    for (const Vector& x : traj.states) cov += x * x.transpose();
    cov /= steps;

    // diagonal entries: Var(sample var of N(0,1)) ~ 2/K, five sigma bounds
    const double five_sigma = 5.0 * std::sqrt(2.0 / steps);
    for (int i = 0; i < n; ++i) {
        CHECK(std::abs(cov(i, i) - 1.0) < five_sigma);
        CHECK(std::abs(cov(i, i) - 1.0) < 0.05);  // within 5 percent
    }
    CHECK(std::abs(cov(0, 1)) < 5.0 * std::sqrt(1.0 / steps));
}

TEST_CASE("same seed gives bitwise-identical trajectories") {
    BlockSpec spec{{2, 2}, {0.5, 0.3, 0.1}};
    Rng rng_a(42);
    Matrix a = generate_block_transition(spec, rng_a);
    StateSpaceModel model = make_isotropic_model(a, spec.noise);

    Rng r1(123), r2(123);
    Trajectory t1 = simulate(model, 50, r1);
    Trajectory t2 = simulate(model, 50, r2);
    for (int k = 0; k < 50; ++k) {
        CHECK(testing::exactly_equal(t1.states[k], t2.states[k]));
        CHECK(testing::exactly_equal(t1.observations[k], t2.observations[k]));
    }
}

TEST_CASE("model validation rejects inconsistent inputs") {
    StateSpaceModel model;
    model.A = Matrix::Identity(2, 2);
    model.H = Matrix::Identity(2, 2);
    model.Q = Matrix::Identity(2, 2);
    model.R = Matrix::Identity(2, 2);
    model.P0 = Matrix::Identity(2, 2);
    model.x0_mean = Vector::Zero(2);
    CHECK_NOTHROW(model.validate());

    SUBCASE("asymmetric covariance") {
        model.Q(0, 1) = 0.5;
        CHECK_THROWS_AS(model.validate(), std::invalid_argument);
    }
    SUBCASE("indefinite covariance") {
        model.R(0, 0) = -1.0;
        CHECK_THROWS_AS(model.validate(), std::invalid_argument);
    }
    SUBCASE("dimension mismatch") {
        model.H = Matrix::Identity(3, 3);
        CHECK_THROWS_AS(model.validate(), std::invalid_argument);
    }
    SUBCASE("steps must be positive") {
        Rng rng(0);
        CHECK_THROWS_AS(simulate(model, 0, rng), std::invalid_argument);
    }
}

TEST_CASE("near-singular prior covariance still samples") {
    // sigma_p = 1e-4 gives P0 = 1e-8 Id
    BlockSpec spec{{3}, {0.1, 0.1, 1e-4}};
    Rng rng(5);
    Matrix a = generate_block_transition(spec, rng);
    StateSpaceModel model = make_isotropic_model(a, spec.noise);
    Trajectory traj = simulate(model, 20, rng);
    CHECK(traj.length() == 20);
}
