#pragma once

#include <vector>

#include "graphem/linalg.hpp"

namespace graphem {

/// Linear-Gaussian state-space model
///
///   x_k = A x_{k-1} + q_k,   q_k ~ N(0, Q)
///   y_k = H x_k     + r_k,   r_k ~ N(0, R)
///   x_0 ~ N(x0_mean, P0)
struct StateSpaceModel {
    Matrix A;        // state transition, N_x x N_x
    Matrix H;        // observation operator, N_y x N_x
    Matrix Q;        // state-noise covariance, N_x x N_x
    Matrix R;        // observation-noise covariance, N_y x N_y
    Vector x0_mean;  // prior mean, N_x
    Matrix P0;       // prior covariance, N_x x N_x

    int state_dim() const { return static_cast<int>(A.rows()); }
    int obs_dim() const { return static_cast<int>(H.rows()); }

    /// Checks dimension consistency and that Q, R, P0 are symmetric PSD
    /// (symmetric within 1e-12 relative, eigenvalues >= -1e-10).
    /// Throws std::invalid_argument.
    void validate() const;
};

struct Trajectory {
    std::vector<Vector> states;        // x_1 .. x_K
    std::vector<Vector> observations;  // y_1 .. y_K

    int length() const { return static_cast<int>(observations.size()); }
};

struct NoiseScales {
    double sigma_q = 1.0;  // state-noise standard deviation
    double sigma_r = 1.0;  // observation-noise standard deviation
    double sigma_p = 1.0;  // prior standard deviation
};

/// Block-diagonal layout plus noise scales of a synthetic system.
struct BlockSpec {
    std::vector<int> block_sizes;
    NoiseScales noise;

    int state_dim() const;
    void validate() const;  // throws std::invalid_argument
};

/// Rescales `a` by (target / max_singular_value) when the max singular value
/// is >= target; otherwise returns `a` unchanged.
Matrix project_to_stable(const Matrix& a, double target = 0.99);

/// Random block-diagonal transition matrix: each diagonal block has i.i.d.
/// uniform [-1, 1] entries, then the whole matrix is projected so its largest
/// singular value stays strictly below one (target 0.99). Off-block entries
/// are exactly zero.
Matrix generate_block_transition(const BlockSpec& spec, Rng& rng);

/// Simulates `steps` transitions of the model. Deterministic given the seed:
/// draws x_0, then q_k and r_k in step order.
Trajectory simulate(const StateSpaceModel& model, int steps, Rng& rng);

/// N_x = N_y model with H = Id, Q = sigma_q^2 Id, R = sigma_r^2 Id,
/// P0 = sigma_p^2 Id and a zero prior mean.
StateSpaceModel make_isotropic_model(const Matrix& a, const NoiseScales& noise);

}  // namespace graphem
