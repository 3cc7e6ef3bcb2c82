#pragma once

#include <vector>

#include "graphem/kalman.hpp"

namespace graphem {

struct GraphEmConfig {
    double gamma = 0.0;      // l1 weight, >= 0
    double theta = 1.0;      // Douglas-Rachford step, in (0, 2)
    double dr_tol = 1e-3;    // inner stopping tolerance on the surrogate
    double em_tol = 1e-3;    // outer stopping tolerance on phi_K
    int max_em_iters = 50;
    int max_dr_iters = 10000;
    double sigma_q2 = 1.0;   // isotropic state-noise variance, Q = sigma_q2 * Id

    void validate() const;  // throws std::invalid_argument
};

struct FitTrace {
    std::vector<double> objective_values;  // phi_K, starting at the initial A
    int iterations = 0;
    bool converged = false;
    Matrix final_A;
};

struct DrResult {
    Matrix A;
    int iterations = 0;
    bool converged = false;
    double objective = 0.0;  // (f1 + f2) at the returned A
};

/// Entrywise sign(z) * max(0, |z| - t). Entries with |z| exactly t map to 0.
Matrix soft_threshold(const Matrix& z, double t);

/// Proximity operator of theta * f1 at X, where
///   f1(A) = (K / 2 sigma_q2) tr(Sigma - C A^T - A C^T + A Phi A^T):
///   returns (X + (theta K / sigma_q2) C) ((theta K / sigma_q2) Phi + Id)^{-1}.
Matrix prox_quadratic(const Matrix& x, const EmStats& stats, double theta,
                      double sigma_q2, int steps);

/// Surrogate value (K / 2 sigma_q2) tr(Sigma - C A^T - A C^T + A Phi A^T)
/// + gamma ||A||_1, additive constant dropped.
double q_surrogate(const Matrix& a, const EmStats& stats, double gamma,
                   double sigma_q2);

/// Douglas-Rachford iteration for the M-step, minimizing f1 + gamma ||.||_1:
///   A_j = soft_threshold(Z_j, theta * gamma)
///   V_j = prox_quadratic(2 A_j - Z_j, ...)
///   Z_{j+1} = Z_j + theta (V_j - A_j)
/// stopping when the surrogate change drops below dr_tol. Hitting
/// max_dr_iters returns the best iterate flagged non-converged. Note the
/// threshold is theta * gamma, the prox of theta * gamma ||.||_1.
DrResult dr_solve(const EmStats& stats, const GraphEmConfig& config,
                  const Matrix& z0);

/// EM estimation of A with the l1 prior: the E-step runs the Kalman filter
/// and RTS smoother at the current A, the M-step runs dr_solve initialized at
/// the current A (the surrogate tangency point). All other model parameters
/// are taken from `model_fixed` as known; its A entry is ignored in favour of
/// `a0`. Requires Q = sigma_q2 * Id matching config.sigma_q2 and a stable a0.
FitTrace graphem_fit(const StateSpaceModel& model_fixed,
                     const std::vector<Vector>& observations,
                     const GraphEmConfig& config, const Matrix& a0);

/// Closed-form M-step update A = C Phi^{-1}.
Matrix mlem_update(const EmStats& stats);

/// Maximum-likelihood EM: same outer loop as graphem_fit with gamma = 0 and
/// the closed-form M-step.
FitTrace mlem_fit(const StateSpaceModel& model_fixed,
                  const std::vector<Vector>& observations, double tol,
                  int max_iters, const Matrix& a0);

/// Dense uniform [-1, 1] matrix rescaled to the given max singular value.
/// Default initializer for A^(0).
Matrix random_stable_dense(int dim, double target_sv, Rng& rng);

}  // namespace graphem
