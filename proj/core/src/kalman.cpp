#include "graphem/kalman.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace graphem {

FilterRun kalman_filter(const StateSpaceModel& model,
                        const std::vector<Vector>& observations) {
    model.validate();
    if (observations.empty()) {
        throw std::invalid_argument("observation sequence must not be empty");
    }
    const auto ny = model.obs_dim();
    const int steps = static_cast<int>(observations.size());

    FilterRun run;
    run.filtered.reserve(steps);
    run.predicted_means.reserve(steps);
    run.predicted_covs.reserve(steps);
    run.innovations.reserve(steps);
    run.innovation_covs.reserve(steps);

    Vector m = model.x0_mean;
    Matrix p = model.P0;
    constexpr double log_two_pi = 1.8378770664093453;  // log(2*pi)

    for (int k = 0; k < steps; ++k) {
        const Vector& y = observations[k];
        if (y.size() != ny) {
            throw std::invalid_argument("observation dimension mismatch at step " +
                                        std::to_string(k + 1));
        }
        Vector m_pred = model.A * m;
        Matrix p_pred = symmetrized(model.A * p * model.A.transpose() + model.Q);
        Vector z = y - model.H * m_pred;
        Matrix s = symmetrized(model.H * p_pred * model.H.transpose() + model.R);

        SpdSolver s_solver(s, "innovation covariance S at step " +
                                  std::to_string(k + 1));
        Matrix gain = s_solver.solve(model.H * p_pred).transpose();

        m = m_pred + gain * z;
        p = symmetrized(p_pred - gain * s * gain.transpose());

        run.neg_log_lik += 0.5 * (ny * log_two_pi + s_solver.log_det() +
                                  z.dot(s_solver.solve(z)));

        run.predicted_means.push_back(std::move(m_pred));
        run.predicted_covs.push_back(std::move(p_pred));
        run.innovations.push_back(std::move(z));
        run.innovation_covs.push_back(std::move(s));
        run.filtered.push_back({m, p});
    }
    if (!std::isfinite(run.neg_log_lik)) {
        throw NumericError("non-finite log-likelihood in Kalman filter");
    }
    return run;
}

SmootherRun rts_smoother(const StateSpaceModel& model, const FilterRun& filter) {
    const int steps = filter.length();
    if (steps < 1) throw std::invalid_argument("empty filter run");

    SmootherRun run;
    run.smoothed.resize(steps + 1);
    run.gains.resize(steps);
    run.smoothed[steps] = filter.filtered[steps - 1];  // exact boundary

    for (int k = steps - 1; k >= 0; --k) {
        const Vector& mk = (k == 0) ? model.x0_mean : filter.filtered[k - 1].mean;
        const Matrix& pk = (k == 0) ? model.P0 : filter.filtered[k - 1].cov;
        // predicted moments of step k+1 live at index k
        SpdSolver pred(filter.predicted_covs[k],
                       "predicted covariance at step " + std::to_string(k + 1));
        Matrix gain = pred.solve(model.A * pk).transpose();
        Vector m_s =
            mk + gain * (run.smoothed[k + 1].mean - filter.predicted_means[k]);
        Matrix p_s = symmetrized(
            pk + gain * (run.smoothed[k + 1].cov - filter.predicted_covs[k]) *
                     gain.transpose());
        run.smoothed[k] = {std::move(m_s), std::move(p_s)};
        run.gains[k] = std::move(gain);
    }
    return run;
}

EmStats em_stats(const StateSpaceModel& model, const FilterRun& filter,
                 const SmootherRun& smoother) {
    const int steps = filter.length();
    if (static_cast<int>(smoother.smoothed.size()) != steps + 1 ||
        static_cast<int>(smoother.gains.size()) != steps) {
        throw std::invalid_argument("smoother run does not match filter run");
    }
    const auto nx = model.state_dim();
    Matrix sigma = Matrix::Zero(nx, nx);
    Matrix phi = Matrix::Zero(nx, nx);
    Matrix cross = Matrix::Zero(nx, nx);

    for (int k = 1; k <= steps; ++k) {
        const GaussianBelief& cur = smoother.smoothed[k];
        const GaussianBelief& prev = smoother.smoothed[k - 1];
        sigma += cur.cov + cur.mean * cur.mean.transpose();
        phi += prev.cov + prev.mean * prev.mean.transpose();
        cross += cur.cov * smoother.gains[k - 1].transpose() +
                 cur.mean * prev.mean.transpose();
    }
    const double inv_steps = 1.0 / steps;
    EmStats stats;
    stats.Sigma = symmetrized(sigma * inv_steps);
    stats.Phi = symmetrized(phi * inv_steps);
    stats.C = cross * inv_steps;
    stats.steps = steps;
    return stats;
}

double neg_log_posterior(const StateSpaceModel& model,
                         const std::vector<Vector>& observations,
                         double gamma) {
    if (gamma < 0) throw std::invalid_argument("gamma must be >= 0");
    return kalman_filter(model, observations).neg_log_lik +
           gamma * l1_norm(model.A);
}

}  // namespace graphem
