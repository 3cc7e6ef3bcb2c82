#include "doctest.h"

#include <cmath>

#include "graphem/kalman.hpp"
#include "oracles.hpp"

using namespace graphem;

namespace {

std::vector<Vector> simulate_observations(const StateSpaceModel& model,
                                          int steps, unsigned seed) {
    Rng rng(seed);
    return simulate(model, steps, rng).observations;
}

}  // namespace

TEST_CASE("scalar conjugate update") {
    // A=0, H=1, Q=1, R=1, y_1=2: hand-computed posterior
    StateSpaceModel model;
    model.A = Matrix::Zero(1, 1);
    model.H = Matrix::Identity(1, 1);
    model.Q = Matrix::Identity(1, 1);
    model.R = Matrix::Identity(1, 1);
    model.P0 = 3.7 * Matrix::Identity(1, 1);  // any P0
    model.x0_mean = Vector::Zero(1);
    model.x0_mean(0) = -4.2;  // any mean, killed by A=0

    Vector y(1);
    y << 2.0;
    FilterRun run = kalman_filter(model, {y});

    CHECK(run.predicted_means[0](0) == doctest::Approx(0.0));
    CHECK(run.predicted_covs[0](0, 0) == doctest::Approx(1.0));
    CHECK(run.innovation_covs[0](0, 0) == doctest::Approx(2.0));
    CHECK(run.filtered[0].mean(0) == doctest::Approx(1.0));
    CHECK(run.filtered[0].cov(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("noiseless observations pin the filtered mean") {
    Rng rng(17);
    const int n = 3;
    StateSpaceModel model = testing::random_model(n, n, rng);
    model.H = Matrix::Identity(n, n);
    model.R = 1e-12 * Matrix::Identity(n, n);

    auto obs = simulate_observations(model, 40, 99);
    FilterRun run = kalman_filter(model, obs);
    for (int k = 0; k < run.length(); ++k) {
        CHECK((run.filtered[k].mean - obs[k]).cwiseAbs().maxCoeff() < 1e-5);
    }
}

TEST_CASE("filter and smoother match batch Gaussian conditioning") {
    Rng rng(2024);
    std::uniform_int_distribution<int> dim(1, 3);
    std::uniform_int_distribution<int> len(1, 10);
    for (int trial = 0; trial < 100; ++trial) {
        const int nx = dim(rng);
        const int ny = dim(rng);
        const int steps = len(rng);
        StateSpaceModel model = testing::random_model(nx, ny, rng);
        auto obs = simulate_observations(model, steps, 1000 + trial);

        FilterRun filter = kalman_filter(model, obs);
        SmootherRun smoother = rts_smoother(model, filter);
        testing::BatchGaussian batch(model, steps);

        CHECK(std::abs(filter.neg_log_lik - batch.neg_log_lik(obs)) < 1e-8);
        for (int k = 1; k <= steps; ++k) {
            GaussianBelief ref = batch.conditional(k, k, obs);
            CHECK((filter.filtered[k - 1].mean - ref.mean).cwiseAbs().maxCoeff() <
                  1e-8);
            CHECK((filter.filtered[k - 1].cov - ref.cov).cwiseAbs().maxCoeff() <
                  1e-8);
        }
        for (int k = 0; k <= steps; ++k) {
            GaussianBelief ref = batch.conditional(k, steps, obs);
            CHECK((smoother.smoothed[k].mean - ref.mean).cwiseAbs().maxCoeff() <
                  1e-8);
            CHECK((smoother.smoothed[k].cov - ref.cov).cwiseAbs().maxCoeff() <
                  1e-8);
        }
    }
}

TEST_CASE("smoother boundary equals the last filtered belief exactly") {
    Rng rng(5);
    StateSpaceModel model = testing::random_model(2, 2, rng);
    auto obs = simulate_observations(model, 12, 6);
    FilterRun filter = kalman_filter(model, obs);
    SmootherRun smoother = rts_smoother(model, filter);
    CHECK(testing::exactly_equal(smoother.smoothed[12].mean,
                                 filter.filtered[11].mean));
    CHECK(testing::exactly_equal(smoother.smoothed[12].cov,
                                 filter.filtered[11].cov));
}

TEST_CASE("A = 0 makes every smoother gain vanish") {
    Rng rng(8);
    StateSpaceModel model = testing::random_model(2, 2, rng);
    model.A = Matrix::Zero(2, 2);
    auto obs = simulate_observations(model, 8, 3);
    FilterRun filter = kalman_filter(model, obs);
    SmootherRun smoother = rts_smoother(model, filter);
    for (const Matrix& gain : smoother.gains) {
        CHECK(gain.cwiseAbs().maxCoeff() == 0.0);
    }
    for (int k = 1; k <= 8; ++k) {
        CHECK(testing::exactly_equal(smoother.smoothed[k].mean,
                                     filter.filtered[k - 1].mean));
        CHECK(testing::exactly_equal(smoother.smoothed[k].cov,
                                     filter.filtered[k - 1].cov));
    }
}

TEST_CASE("covariances stay symmetric PSD through the recursions") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        StateSpaceModel model = testing::random_model(3, 2, rng);
        auto obs = simulate_observations(model, 15, 500 + trial);
        FilterRun filter = kalman_filter(model, obs);
        SmootherRun smoother = rts_smoother(model, filter);
        for (const auto& belief : filter.filtered) {
            CHECK(is_symmetric(belief.cov, 1e-9));
            CHECK(min_eigenvalue(belief.cov) > -1e-9);
        }
        for (const auto& belief : smoother.smoothed) {
            CHECK(is_symmetric(belief.cov, 1e-9));
            CHECK(min_eigenvalue(belief.cov) > -1e-9);
        }
    }
}

TEST_CASE("EM statistics for a single deterministic step") {
    // K=1, all smoothed covariances zero, m_0^s = 2, m_1^s = 3
    StateSpaceModel model;
    model.A = Matrix::Identity(1, 1);
    model.H = Matrix::Identity(1, 1);
    model.Q = Matrix::Identity(1, 1);
    model.R = Matrix::Identity(1, 1);
    model.P0 = Matrix::Identity(1, 1);
    model.x0_mean = Vector::Zero(1);

    FilterRun filter;
    filter.filtered = {{Vector::Constant(1, 3.0), Matrix::Zero(1, 1)}};
    filter.predicted_means = {Vector::Constant(1, 2.0)};
    filter.predicted_covs = {Matrix::Identity(1, 1)};
    filter.innovations = {Vector::Zero(1)};
    filter.innovation_covs = {Matrix::Identity(1, 1)};

    SmootherRun smoother;
    smoother.smoothed = {{Vector::Constant(1, 2.0), Matrix::Zero(1, 1)},
                         {Vector::Constant(1, 3.0), Matrix::Zero(1, 1)}};
    smoother.gains = {Matrix::Zero(1, 1)};

    EmStats stats = em_stats(model, filter, smoother);
    CHECK(stats.Sigma(0, 0) == doctest::Approx(9.0));
    CHECK(stats.Phi(0, 0) == doctest::Approx(4.0));
    CHECK(stats.C(0, 0) == doctest::Approx(6.0));
    CHECK(stats.steps == 1);
}

TEST_CASE("EM statistics are symmetric PSD") {
    Rng rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        StateSpaceModel model = testing::random_model(3, 3, rng);
        auto obs = simulate_observations(model, 25, 900 + trial);
        FilterRun filter = kalman_filter(model, obs);
        SmootherRun smoother = rts_smoother(model, filter);
        EmStats stats = em_stats(model, filter, smoother);
        CHECK(is_symmetric(stats.Sigma, 1e-9));
        CHECK(is_symmetric(stats.Phi, 1e-9));
        CHECK(min_eigenvalue(stats.Sigma) > -1e-9);
        CHECK(min_eigenvalue(stats.Phi) > -1e-9);
    }
}

TEST_CASE("EM statistics agree with posterior sampling") {
    // scalar K=3 model; Monte-Carlo over the batch posterior
    Rng rng(404);
    StateSpaceModel model = testing::random_model(1, 1, rng);
    auto obs = simulate_observations(model, 3, 41);

    FilterRun filter = kalman_filter(model, obs);
    SmootherRun smoother = rts_smoother(model, filter);
    EmStats exact = em_stats(model, filter, smoother);

    testing::BatchGaussian batch(model, 3);
    Rng mc_rng(555);
    EmStats sampled = testing::monte_carlo_em_stats(batch, obs, 1000000, mc_rng);

    CHECK(std::abs(sampled.Sigma(0, 0) - exact.Sigma(0, 0)) <
          0.01 * std::abs(exact.Sigma(0, 0)));
    CHECK(std::abs(sampled.Phi(0, 0) - exact.Phi(0, 0)) <
          0.01 * std::abs(exact.Phi(0, 0)));
    CHECK(std::abs(sampled.C(0, 0) - exact.C(0, 0)) <
          0.01 * std::abs(exact.C(0, 0)));
}

TEST_CASE("neg_log_posterior") {
    Rng rng(12);
    StateSpaceModel model = testing::random_model(2, 2, rng);
    auto obs = simulate_observations(model, 10, 13);
    FilterRun filter = kalman_filter(model, obs);

    SUBCASE("gamma = 0 equals the filter likelihood") {
        CHECK(neg_log_posterior(model, obs, 0.0) ==
              doctest::Approx(filter.neg_log_lik).epsilon(1e-14));
    }
    SUBCASE("l1 arithmetic") {
        model.A << 1.0, -2.0, 0.0, 0.0;
        const double base = kalman_filter(model, obs).neg_log_lik;
        CHECK(neg_log_posterior(model, obs, 1.0) ==
              doctest::Approx(base + 3.0).epsilon(1e-14));
    }
    SUBCASE("linear in gamma") {
        const double l1 = l1_norm(model.A);
        const double p1 = neg_log_posterior(model, obs, 1.5);
        const double p2 = neg_log_posterior(model, obs, 3.0);
        CHECK(p2 - p1 == doctest::Approx(1.5 * l1).epsilon(1e-12));
    }
    SUBCASE("negative gamma rejected") {
        CHECK_THROWS_AS(neg_log_posterior(model, obs, -0.1),
                        std::invalid_argument);
    }
}

TEST_CASE("empty observation sequence is rejected") {
    Rng rng(1);
    StateSpaceModel model = testing::random_model(2, 2, rng);
    CHECK_THROWS_AS(kalman_filter(model, {}), std::invalid_argument);
}
