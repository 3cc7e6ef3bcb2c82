#pragma once

#include <vector>

#include "graphem/linalg.hpp"

namespace graphem {

struct VarFit {
    std::vector<Matrix> coefficients;  // coefficients[l](n, m): lag l+1, m -> n
    Matrix residual_covariance;
    std::vector<Vector> residuals;     // length K - p
};

/// Directed binary graph; adjacency(n, m) true means series m Granger-causes
/// series n.
struct BinaryGraph {
    BoolMatrix adjacency;

    int dim() const { return static_cast<int>(adjacency.rows()); }
};

/// Ordinary least squares VAR(p) fit, one regression per target dimension,
/// no intercept. Residual covariance uses denominator K - p - N*p.
VarFit fit_var(const Matrix& series, int lag);

/// Pairwise Granger causality. For each ordered pair (m -> n), m != n, fits
/// series n on its own p lags (restricted) and on lags of n and m
/// (unrestricted), then F-tests the residual sums of squares with
/// (p, K - 2p - 1) degrees of freedom; an edge is set when p-value < alpha.
/// Diagonal entries come from the self-lag test shared with conditional_gc.
BinaryGraph pairwise_gc(const Matrix& series, int lag, double alpha);

/// Conditional Granger causality. The restricted model for (m -> n) uses lags
/// of every series except m, the unrestricted adds m; F-test with
/// (p, K - N*p - 1) degrees of freedom. For N = 2 this coincides with
/// pairwise_gc exactly.
BinaryGraph conditional_gc(const Matrix& series, int lag, double alpha);

}  // namespace graphem
