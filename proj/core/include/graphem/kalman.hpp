#pragma once

#include <vector>

#include "graphem/state_space.hpp"

namespace graphem {

struct GaussianBelief {
    Vector mean;
    Matrix cov;
};

/// Forward pass products. All sequences have length K; entry [k-1] belongs to
/// time step k.
struct FilterRun {
    std::vector<GaussianBelief> filtered;  // p(x_k | y_{1:k})
    std::vector<Vector> predicted_means;   // m_k^-
    std::vector<Matrix> predicted_covs;    // P_k^-
    std::vector<Vector> innovations;       // z_k = y_k - H m_k^-
    std::vector<Matrix> innovation_covs;   // S_k = H P_k^- H^T + R
    double neg_log_lik = 0.0;

    int length() const { return static_cast<int>(filtered.size()); }
};

/// Backward pass products. smoothed[k] is p(x_k | y_{1:K}) for k = 0..K, so
/// the prior index 0 is included; gains[k] is G_k for k = 0..K-1.
struct SmootherRun {
    std::vector<GaussianBelief> smoothed;
    std::vector<Matrix> gains;
};

/// Sufficient statistics of the EM quadratic in A, normalized by 1/K:
///   Sigma = (1/K) sum_{k=1..K} (P_k^s + m_k^s m_k^s^T)
///   Phi   = (1/K) sum_{k=1..K} (P_{k-1}^s + m_{k-1}^s m_{k-1}^s^T)
///   C     = (1/K) sum_{k=1..K} (P_k^s G_{k-1}^T + m_k^s m_{k-1}^s^T)
struct EmStats {
    Matrix Sigma;
    Matrix Phi;
    Matrix C;
    int steps = 0;  // K
};

/// Standard predict/update recursion from (x0_mean, P0). Covariances are
/// symmetrized after every update. Throws NumericError naming the step when
/// an innovation covariance cannot be factorized after jitter.
FilterRun kalman_filter(const StateSpaceModel& model,
                        const std::vector<Vector>& observations);

/// Rauch-Tung-Striebel backward recursion; the k = 0 step treats the prior
/// (x0_mean, P0) as the filtered quantity. smoothed[K] equals the filtered
/// belief at K exactly.
SmootherRun rts_smoother(const StateSpaceModel& model, const FilterRun& filter);

EmStats em_stats(const StateSpaceModel& model, const FilterRun& filter,
                 const SmootherRun& smoother);

/// MAP energy phi_K(A) = gamma * ||A||_1 + sum_k [ 1/2 log|2 pi S_k|
/// + 1/2 z_k^T S_k^{-1} z_k ]; with gamma = 0 this is the filter's
/// neg_log_lik.
double neg_log_posterior(const StateSpaceModel& model,
                         const std::vector<Vector>& observations, double gamma);

}  // namespace graphem
