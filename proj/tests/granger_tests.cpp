#include "doctest.h"

#include <cmath>

#include "graphem/granger.hpp"
#include "graphem/state_space.hpp"
#include "oracles.hpp"

using namespace graphem;

namespace {

Matrix white_noise(int steps, int n, unsigned seed) {
    Rng rng(seed);
    std::normal_distribution<double> normal;
    Matrix series(steps, n);
    for (int t = 0; t < steps; ++t) {
        for (int c = 0; c < n; ++c) series(t, c) = normal(rng);
    }
    return series;
}

Matrix var1_series(const Matrix& a, int steps, double noise_sd,
                   unsigned seed) {
    Rng rng(seed);
    std::normal_distribution<double> normal;
    const int n = static_cast<int>(a.rows());
    Matrix series(steps, n);
    Vector x = Vector::Zero(n);
    for (int t = 0; t < steps; ++t) {
        Vector q(n);
        for (int i = 0; i < n; ++i) q(i) = noise_sd * normal(rng);
        x = a * x + q;
        series.row(t) = x.transpose();
    }
    return series;
}

}  // namespace

TEST_CASE("fit_var recovers a strong AR(1) coefficient") {
    Matrix a(1, 1);
    a << 0.9;
    Matrix series = var1_series(a, 2000, 0.1, 3);
    VarFit fit = fit_var(series, 1);
    REQUIRE(fit.coefficients.size() == 1);
    CHECK(std::abs(fit.coefficients[0](0, 0) - 0.9) < 0.05);
    CHECK(static_cast<int>(fit.residuals.size()) == 1999);
}

TEST_CASE("fit_var on white noise gives near-zero coefficients") {
    Matrix series = white_noise(1500, 2, 17);
    VarFit fit = fit_var(series, 1);
    // standard error of an AR coefficient on white noise ~ 1/sqrt(K)
    const double three_se = 3.0 / std::sqrt(1500.0);
    for (int n = 0; n < 2; ++n) {
        for (int m = 0; m < 2; ++m) {
            CHECK(std::abs(fit.coefficients[0](n, m)) < three_se);
        }
    }
}

TEST_CASE("fit_var reproduces a deterministic recursion exactly") {
    Matrix series(50, 1);
    series(0, 0) = 2.5;
    for (int t = 1; t < 50; ++t) series(t, 0) = series(t - 1, 0);
    VarFit fit = fit_var(series, 1);
    CHECK(fit.coefficients[0](0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    for (const Vector& r : fit.residuals) {
        CHECK(std::abs(r(0)) < 1e-12);
    }
}

TEST_CASE("fit_var rejects short series and duplicate columns") {
    CHECK_THROWS_AS(fit_var(white_noise(3, 2, 1), 1), std::invalid_argument);

    Matrix series = white_noise(200, 2, 2);
    series.col(1) = series.col(0);  // collinear regressors
    CHECK_THROWS_AS(fit_var(series, 1), NumericError);
}

TEST_CASE("pairwise detector finds a strong directed edge") {
    Matrix a(2, 2);
    a << 0.9, 0.0, 0.8, 0.5;  // series 1 drives series 2
    int found_12 = 0;
    int found_21 = 0;
    const int n_seeds = 100;
    for (int seed = 0; seed < n_seeds; ++seed) {
        Matrix series = var1_series(a, 1000, 1.0, 100 + seed);
        BinaryGraph graph = pairwise_gc(series, 1, 0.05);
        if (graph.adjacency(1, 0)) ++found_12;  // m=0 causes n=1
        if (graph.adjacency(0, 1)) ++found_21;
    }
    CHECK(found_12 >= 95);
    CHECK(found_21 <= 20);  // roughly alpha-level false positives
}

TEST_CASE("false-edge rate on independent noise stays near alpha") {
    const double alpha = 0.05;
    const int n_seeds = 200;
    const int n = 3;
    long pgc_false = 0;
    long cgc_false = 0;
    long trials = 0;
    for (int seed = 0; seed < n_seeds; ++seed) {
        Matrix series = white_noise(200, n, 5000 + seed);
        BinaryGraph pgc = pairwise_gc(series, 1, alpha);
        BinaryGraph cgc = conditional_gc(series, 1, alpha);
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) {
                if (r == c) continue;
                ++trials;
                if (pgc.adjacency(r, c)) ++pgc_false;
                if (cgc.adjacency(r, c)) ++cgc_false;
            }
        }
    }
    // 99.9% binomial band around alpha
    const double band =
        3.29 * std::sqrt(alpha * (1 - alpha) / static_cast<double>(trials));
    CHECK(std::abs(static_cast<double>(pgc_false) / trials - alpha) < band);
    CHECK(std::abs(static_cast<double>(cgc_false) / trials - alpha) < band);
}

TEST_CASE("single series has no off-diagonal edges") {
    Matrix a(1, 1);
    a << 0.8;
    Matrix series = var1_series(a, 300, 1.0, 9);
    BinaryGraph graph = pairwise_gc(series, 1, 0.05);
    CHECK(graph.dim() == 1);
    CHECK(graph.adjacency(0, 0));  // strong self dependence
}

TEST_CASE("pairwise equals conditional for two series") {
    for (int seed = 0; seed < 25; ++seed) {
        Matrix a(2, 2);
        Rng rng(40 + seed);
        std::uniform_real_distribution<double> unif(-0.6, 0.6);
        a << unif(rng), unif(rng), unif(rng), unif(rng);
        Matrix series = var1_series(project_to_stable(a, 0.95), 250, 1.0,
                                    7000 + seed);
        BinaryGraph pgc = pairwise_gc(series, 1, 0.05);
        BinaryGraph cgc = conditional_gc(series, 1, 0.05);
        CHECK(testing::exactly_equal(pgc.adjacency.cast<int>(),
                                     cgc.adjacency.cast<int>()));
    }
}

TEST_CASE("conditional detector rejects the chain shortcut") {
    // 1 -> 2 -> 3; the pairwise test sees a spurious 1 -> 3 edge
    Matrix a(3, 3);
    a << 0.9, 0.0, 0.0,
         0.8, 0.5, 0.0,
         0.0, 0.8, 0.5;
    int pgc_shortcut = 0;
    int cgc_shortcut = 0;
    const int n_seeds = 100;
    for (int seed = 0; seed < n_seeds; ++seed) {
        Matrix series = var1_series(a, 1000, 1.0, 2000 + seed);
        BinaryGraph pgc = pairwise_gc(series, 1, 0.05);
        BinaryGraph cgc = conditional_gc(series, 1, 0.05);
        if (pgc.adjacency(2, 0)) ++pgc_shortcut;
        if (cgc.adjacency(2, 0)) ++cgc_shortcut;
    }
    // CGC rejects the shortcut in the majority of runs where PGC reports it
    CHECK(cgc_shortcut < pgc_shortcut);
    CHECK(cgc_shortcut < n_seeds / 2);
    CHECK(pgc_shortcut > n_seeds / 2);
}

TEST_CASE("detectors are deterministic") {
    Matrix series = white_noise(150, 3, 77);
    BinaryGraph g1 = pairwise_gc(series, 2, 0.05);
    BinaryGraph g2 = pairwise_gc(series, 2, 0.05);
    CHECK(testing::exactly_equal(g1.adjacency.cast<int>(),
                                 g2.adjacency.cast<int>()));
}

TEST_CASE("recall increases with series length") {
    BlockSpec block{{2, 2}, {0.5, 0.05, 0.1}};
    const std::vector<int> lengths = {250, 1000, 4000};
    std::vector<double> recall(lengths.size(), 0.0);
    const int n_seeds = 20;
    for (int seed = 0; seed < n_seeds; ++seed) {
        Rng rng(300 + seed);
        Matrix a_true = generate_block_transition(block, rng);
        StateSpaceModel model = make_isotropic_model(a_true, block.noise);
        Trajectory traj = simulate(model, lengths.back(), rng);
        Matrix full = Matrix(lengths.back(), 4);
        for (int t = 0; t < lengths.back(); ++t) {
            full.row(t) = traj.observations[t].transpose();
        }
        for (std::size_t i = 0; i < lengths.size(); ++i) {
            BinaryGraph graph =
                pairwise_gc(full.topRows(lengths[i]), 1, 0.05);
            long tp = 0, fn = 0;
            for (int r = 0; r < 4; ++r) {
                for (int c = 0; c < 4; ++c) {
                    if (std::abs(a_true(r, c)) < 1e-10) continue;
                    graph.adjacency(r, c) ? ++tp : ++fn;
                }
            }
            recall[i] += static_cast<double>(tp) / (tp + fn) / n_seeds;
        }
    }
    CHECK(recall[1] >= recall[0]);
    CHECK(recall[2] >= recall[1]);
}
