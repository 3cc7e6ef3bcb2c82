#pragma once

#include <Eigen/Dense>

#include <random>
#include <stdexcept>
#include <string>

namespace graphem {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Seeded random source used by every randomized operation.
using Rng = std::mt19937_64;

/// Thrown when a linear-algebra step cannot proceed (singular factorization,
/// non-finite intermediate). The message names the failing step.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline Matrix symmetrized(const Matrix& m) {
    return 0.5 * (m + m.transpose());
}

/// Entrywise sum of absolute values.
double l1_norm(const Matrix& m);

double max_singular_value(const Matrix& m);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& m);

bool is_symmetric(const Matrix& m, double rel_tol = 1e-12);

/// Cholesky factorization of a symmetric positive-definite matrix.
/// On failure retries once with 1e-10 * (trace/n) jitter on the diagonal,
/// then throws NumericError naming `what`.
class SpdSolver {
  public:
    SpdSolver(Matrix m, const std::string& what);

    template <typename Derived>
    auto solve(const Eigen::MatrixBase<Derived>& rhs) const {
        return llt_.solve(rhs);
    }
    double log_det() const;
    bool jittered() const { return jittered_; }

  private:
    Eigen::LLT<Matrix> llt_;
    bool jittered_ = false;
};

/// Draws from N(mean, cov). cov must be symmetric PSD; an exactly zero
/// covariance returns the mean without consuming randomness. A failed
/// Cholesky is retried once with 1e-10 identity jitter.
Vector sample_mvn(const Vector& mean, const Matrix& cov, Rng& rng,
                  const std::string& what);

}  // namespace graphem
