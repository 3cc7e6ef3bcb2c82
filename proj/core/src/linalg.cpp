#include "graphem/linalg.hpp"

namespace graphem {

double l1_norm(const Matrix& m) {
    return m.cwiseAbs().sum();
}

double max_singular_value(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

double min_eigenvalue(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

bool is_symmetric(const Matrix& m, double rel_tol) {
    if (m.rows() != m.cols()) return false;
    double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

SpdSolver::SpdSolver(Matrix m, const std::string& what) {
    llt_.compute(m);
    if (llt_.info() != Eigen::Success) {
        const auto n = m.rows();
        const double jitter = 1e-10 * m.trace() / static_cast<double>(n);
        m.diagonal().array() += jitter;
        llt_.compute(m);
        jittered_ = true;
        if (llt_.info() != Eigen::Success) {
            throw NumericError("Cholesky factorization failed for " + what);
        }
    }
}

double SpdSolver::log_det() const {
    return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

Vector sample_mvn(const Vector& mean, const Matrix& cov, Rng& rng,
                  const std::string& what) {
    if (cov.isZero(0.0)) return mean;
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
        Matrix jittered = cov;
        jittered.diagonal().array() += 1e-10;
        llt.compute(jittered);
        if (llt.info() != Eigen::Success) {
            throw NumericError("covariance not PSD when sampling " + what);
        }
    }
    std::normal_distribution<double> normal;
    Vector z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    return mean + llt.matrixL() * z;
}

}  // namespace graphem
