#include "graphem/graph_em.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace graphem {

namespace {

void check_isotropic_q(const StateSpaceModel& model, double sigma_q2) {
    const auto n = model.Q.rows();
    const double tol = 1e-9 * std::max(1.0, sigma_q2);
    if ((model.Q - sigma_q2 * Matrix::Identity(n, n)).cwiseAbs().maxCoeff() >
        tol) {
        throw std::invalid_argument(
            "only isotropic Q = sigma_q2 * Id is supported; model Q does not "
            "match config.sigma_q2");
    }
}

}  // namespace

void GraphEmConfig::validate() const {
    if (gamma < 0) throw std::invalid_argument("gamma must be >= 0");
    if (theta <= 0 || theta >= 2) {
        throw std::invalid_argument("theta must lie in (0, 2)");
    }
    if (dr_tol <= 0 || em_tol <= 0) {
        throw std::invalid_argument("tolerances must be positive");
    }
    if (max_em_iters < 1 || max_dr_iters < 1) {
        throw std::invalid_argument("iteration limits must be >= 1");
    }
    if (sigma_q2 <= 0) throw std::invalid_argument("sigma_q2 must be positive");
}

Matrix soft_threshold(const Matrix& z, double t) {
    if (t < 0) throw std::invalid_argument("threshold must be >= 0");
    return z.unaryExpr([t](double v) {
        const double mag = std::abs(v) - t;
        return mag > 0 ? (v > 0 ? mag : -mag) : 0.0;
    });
}

Matrix prox_quadratic(const Matrix& x, const EmStats& stats, double theta,
                      double sigma_q2, int steps) {
    const double tau = theta * steps / sigma_q2;
    const auto n = x.rows();
    SpdSolver lhs(tau * stats.Phi + Matrix::Identity(n, n),
                  "prox system (theta K / sigma_q2) Phi + Id");
    // right-multiplication by the symmetric inverse
    return lhs.solve((x + tau * stats.C).transpose()).transpose();
}

double q_surrogate(const Matrix& a, const EmStats& stats, double gamma,
                   double sigma_q2) {
    const double quad = stats.Sigma.trace() -
                        2.0 * stats.C.cwiseProduct(a).sum() +
                        (a * stats.Phi).cwiseProduct(a).sum();
    return 0.5 * stats.steps / sigma_q2 * quad + gamma * l1_norm(a);
}

DrResult dr_solve(const EmStats& stats, const GraphEmConfig& config,
                  const Matrix& z0) {
    config.validate();
    if (z0.rows() != stats.Phi.rows() || z0.cols() != stats.Phi.cols()) {
        throw std::invalid_argument("Z0 shape does not match the statistics");
    }
    const double tau = config.theta * stats.steps / config.sigma_q2;
    const auto n = z0.rows();
    SpdSolver prox_lhs(tau * stats.Phi + Matrix::Identity(n, n),
                       "prox system (theta K / sigma_q2) Phi + Id");
    const double threshold = config.theta * config.gamma;

    Matrix z = z0;
    Matrix a = soft_threshold(z, threshold);
    double objective = q_surrogate(a, stats, config.gamma, config.sigma_q2);

    DrResult best{a, 0, false, objective};
    for (int j = 1; j <= config.max_dr_iters; ++j) {
        Matrix v =
            prox_lhs.solve((2.0 * a - z + tau * stats.C).transpose()).transpose();
        z += config.theta * (v - a);
        Matrix a_next = soft_threshold(z, threshold);
        const double next =
            q_surrogate(a_next, stats, config.gamma, config.sigma_q2);
        if (next < best.objective) best = {a_next, j, false, next};
        const double change = std::abs(next - objective);
        a = std::move(a_next);
        objective = next;
        if (change <= config.dr_tol) {
            return {std::move(a), j, true, objective};
        }
    }
    return best;  // best iterate, flagged non-converged
}

Matrix mlem_update(const EmStats& stats) {
    SpdSolver phi(stats.Phi, "EM statistic Phi");
    return phi.solve(stats.C.transpose()).transpose();
}

namespace {

// Shared EM outer loop; the only difference between the two fits is the
// M-step. phi_K is evaluated with the filter of the updated A, which doubles
// as the next E-step filter, so each iteration runs one filter pass.
template <typename MStep>
FitTrace em_loop(const StateSpaceModel& model_fixed,
                 const std::vector<Vector>& observations, double gamma,
                 double tol, int max_iters, const Matrix& a0, MStep m_step) {
    if (a0.rows() != model_fixed.A.rows() || a0.cols() != model_fixed.A.cols()) {
        throw std::invalid_argument("A0 shape does not match the model");
    }
    if (max_singular_value(a0) >= 1.0) {
        throw std::invalid_argument("A0 must have max singular value < 1");
    }

    StateSpaceModel model = model_fixed;
    model.A = a0;

    FitTrace trace;
    FilterRun filter = kalman_filter(model, observations);
    trace.objective_values.push_back(filter.neg_log_lik +
                                     gamma * l1_norm(model.A));

    for (int i = 1; i <= max_iters; ++i) {
        try {
            SmootherRun smoother = rts_smoother(model, filter);
            EmStats stats = em_stats(model, filter, smoother);
            model.A = m_step(stats, model.A);
            filter = kalman_filter(model, observations);
        } catch (const NumericError& err) {
            throw NumericError("EM iteration " + std::to_string(i) + ": " +
                               err.what());
        }
        const double objective = filter.neg_log_lik + gamma * l1_norm(model.A);
        const double change = std::abs(objective - trace.objective_values.back());
        trace.objective_values.push_back(objective);
        trace.iterations = i;
        if (change <= tol) {
            trace.converged = true;
            break;
        }
    }
    trace.final_A = model.A;
    return trace;
}

}  // namespace

FitTrace graphem_fit(const StateSpaceModel& model_fixed,
                     const std::vector<Vector>& observations,
                     const GraphEmConfig& config, const Matrix& a0) {
    config.validate();
    check_isotropic_q(model_fixed, config.sigma_q2);

    return em_loop(
        model_fixed, observations, config.gamma, config.em_tol,
        config.max_em_iters, a0, [&config](const EmStats& stats, const Matrix& prev) {
            DrResult dr = dr_solve(stats, config, prev);
            // a truncated inner solve must not break the descent guarantee
            const double q_new =
                q_surrogate(dr.A, stats, config.gamma, config.sigma_q2);
            const double q_prev =
                q_surrogate(prev, stats, config.gamma, config.sigma_q2);
            return q_new <= q_prev ? dr.A : prev;
        });
}

FitTrace mlem_fit(const StateSpaceModel& model_fixed,
                  const std::vector<Vector>& observations, double tol,
                  int max_iters, const Matrix& a0) {
    if (tol <= 0) throw std::invalid_argument("tol must be positive");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
    return em_loop(model_fixed, observations, 0.0, tol, max_iters, a0,
                   [](const EmStats& stats, const Matrix&) {
                       return mlem_update(stats);
                   });
}

Matrix random_stable_dense(int dim, double target_sv, Rng& rng) {
    if (dim < 1) throw std::invalid_argument("dim must be >= 1");
    if (target_sv <= 0) throw std::invalid_argument("target_sv must be > 0");
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Matrix a(dim, dim);
    double sv = 0.0;
    do {
        for (int r = 0; r < dim; ++r) {
            for (int c = 0; c < dim; ++c) a(r, c) = unif(rng);
        }
        sv = max_singular_value(a);
    } while (sv == 0.0);
    return (target_sv / sv) * a;
}

}  // namespace graphem
