#pragma once

// Independent reference implementations used to check the recursive
// filter/smoother and the proximal solver. Everything here works on the
// batch joint-Gaussian form and deliberately shares no code with the
// recursions under test.

#include <functional>
#include <vector>

#include "graphem/graph_em.hpp"
#include "graphem/kalman.hpp"
#include "graphem/state_space.hpp"

namespace graphem::testing {

/// Joint Gaussian over (x_0..x_K, y_1..y_K) assembled directly from the model
/// recursion, without any filtering.
class BatchGaussian {
  public:
    BatchGaussian(const StateSpaceModel& model, int steps);

    /// -log N(y_{1:K}; mean, cov) of the stacked observation vector.
    double neg_log_lik(const std::vector<Vector>& observations) const;

    /// p(x_k | y_{1:upto}) by conditioning the joint on the first `upto`
    /// observations; upto = steps gives the smoothing marginal, k may be 0.
    GaussianBelief conditional(int k, int upto,
                               const std::vector<Vector>& observations) const;

    /// Posterior mean and covariance of the full stacked state x_{0:K} given
    /// all observations.
    void posterior(const std::vector<Vector>& observations, Vector& mean,
                   Matrix& cov) const;

    int state_dim() const { return nx_; }
    int steps() const { return steps_; }

  private:
    Vector stack(const std::vector<Vector>& observations) const;

    int nx_ = 0;
    int ny_ = 0;
    int steps_ = 0;
    Vector x_mean_;   // stacked over k = 0..K
    Matrix x_cov_;
    Vector y_mean_;   // stacked over k = 1..K
    Matrix y_cov_;
    Matrix xy_cov_;   // ((K+1) Nx) x (K Ny)
};

/// Monte-Carlo estimate of the EM statistics from posterior samples of the
/// stacked state. Returns Sigma, Phi, C in the same normalization as
/// em_stats.
EmStats monte_carlo_em_stats(const BatchGaussian& batch,
                             const std::vector<Vector>& observations,
                             int n_samples, Rng& rng);

/// Random symmetric positive-definite matrix with eigenvalues bounded away
/// from zero.
Matrix random_spd(int dim, Rng& rng, double ridge = 0.1);

/// Random fully-specified model with a stable A; dimensions as given.
StateSpaceModel random_model(int nx, int ny, Rng& rng);

/// argmin over a dense grid of a scalar function; used as the prox oracle.
double grid_argmin(double lo, double hi, double step,
                   const std::function<double(double)>& f);

template <typename A, typename B>
bool exactly_equal(const A& a, const B& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           a.cwiseEqual(b).all();
}

}  // namespace graphem::testing
