#include "graphem/state_space.hpp"

#include <numeric>
#include <stdexcept>

namespace graphem {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void check_covariance(const Matrix& m, const char* name) {
    if (!is_symmetric(m, 1e-12)) {
        throw std::invalid_argument(std::string(name) + " must be symmetric");
    }
    if (min_eigenvalue(symmetrized(m)) < -1e-10) {
        throw std::invalid_argument(std::string(name) +
                                    " must be positive semi-definite");
    }
}

// Cholesky factor reused across simulation steps; zero covariance means no
// noise and no rng consumption.
class MvnSampler {
  public:
    MvnSampler(const Matrix& cov, const std::string& what) : dim_(cov.rows()) {
        if (cov.isZero(0.0)) {
            zero_ = true;
            return;
        }
        Eigen::LLT<Matrix> llt(cov);
        if (llt.info() != Eigen::Success) {
            Matrix jittered = cov;
            jittered.diagonal().array() += 1e-10;
            llt.compute(jittered);
            if (llt.info() != Eigen::Success) {
                throw NumericError("covariance not PSD when sampling " + what);
            }
        }
        chol_ = llt.matrixL();
    }

    Vector draw(Rng& rng) {
        if (zero_) return Vector::Zero(dim_);
        Vector z(dim_);
        for (Eigen::Index i = 0; i < dim_; ++i) z(i) = normal_(rng);
        return chol_ * z;
    }

  private:
    Matrix chol_;
    Eigen::Index dim_ = 0;
    bool zero_ = false;
    std::normal_distribution<double> normal_;
};

}  // namespace

void StateSpaceModel::validate() const {
    const auto nx = A.rows();
    const auto ny = H.rows();
    require(nx > 0, "state dimension must be positive");
    require(A.cols() == nx, "A must be square");
    require(H.cols() == nx, "H must have N_x columns");
    require(Q.rows() == nx && Q.cols() == nx, "Q must be N_x x N_x");
    require(R.rows() == ny && R.cols() == ny, "R must be N_y x N_y");
    require(P0.rows() == nx && P0.cols() == nx, "P0 must be N_x x N_x");
    require(x0_mean.size() == nx, "x0_mean must have N_x entries");
    check_covariance(Q, "Q");
    check_covariance(R, "R");
    check_covariance(P0, "P0");
}

int BlockSpec::state_dim() const {
    return std::accumulate(block_sizes.begin(), block_sizes.end(), 0);
}

void BlockSpec::validate() const {
    require(!block_sizes.empty(), "block list must not be empty");
    for (int b : block_sizes) require(b >= 1, "block sizes must be >= 1");
    require(noise.sigma_q > 0 && noise.sigma_r > 0 && noise.sigma_p > 0,
            "noise scales must be positive");
}

Matrix project_to_stable(const Matrix& a, double target) {
    const double sv = max_singular_value(a);
    if (sv >= target) return (target / sv) * a;
    return a;
}

Matrix generate_block_transition(const BlockSpec& spec, Rng& rng) {
    spec.validate();
    const int n = spec.state_dim();
    Matrix a = Matrix::Zero(n, n);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    int offset = 0;
    for (int b : spec.block_sizes) {
        for (int r = 0; r < b; ++r) {
            for (int c = 0; c < b; ++c) {
                a(offset + r, offset + c) = unif(rng);
            }
        }
        offset += b;
    }
    return project_to_stable(a);
}

Trajectory simulate(const StateSpaceModel& model, int steps, Rng& rng) {
    model.validate();
    if (steps < 1) throw std::invalid_argument("steps must be >= 1");

    MvnSampler prior(model.P0, "P0");
    MvnSampler state_noise(model.Q, "Q");
    MvnSampler obs_noise(model.R, "R");

    Trajectory traj;
    traj.states.reserve(steps);
    traj.observations.reserve(steps);

    Vector x = model.x0_mean + prior.draw(rng);
    for (int k = 0; k < steps; ++k) {
        x = model.A * x + state_noise.draw(rng);
        traj.states.push_back(x);
        traj.observations.push_back(model.H * x + obs_noise.draw(rng));
    }
    return traj;
}

StateSpaceModel make_isotropic_model(const Matrix& a,
                                     const NoiseScales& noise) {
    const auto n = a.rows();
    StateSpaceModel model;
    model.A = a;
    model.H = Matrix::Identity(n, n);
    model.Q = noise.sigma_q * noise.sigma_q * Matrix::Identity(n, n);
    model.R = noise.sigma_r * noise.sigma_r * Matrix::Identity(n, n);
    model.P0 = noise.sigma_p * noise.sigma_p * Matrix::Identity(n, n);
    model.x0_mean = Vector::Zero(n);
    return model;
}

}  // namespace graphem
