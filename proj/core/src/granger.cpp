#include "graphem/granger.hpp"

#include <stdexcept>
#include <string>

#include "graphem/fdist.hpp"

namespace graphem {

namespace {

// Design matrix of lagged regressors for rows t = p..K-1: columns ordered
// lag-major, variable-minor, i.e. column (l-1)*|vars| + i holds
// series(t - l, vars[i]).
Matrix lagged_design(const Matrix& series, const std::vector<int>& vars,
                     int lag) {
    const auto rows = series.rows() - lag;
    Matrix design(rows, static_cast<Eigen::Index>(vars.size()) * lag);
    for (int l = 1; l <= lag; ++l) {
        for (std::size_t i = 0; i < vars.size(); ++i) {
            design.col((l - 1) * vars.size() + i) =
                series.col(vars[i]).segment(lag - l, rows);
        }
    }
    return design;
}

Vector target_column(const Matrix& series, int var, int lag) {
    return series.col(var).tail(series.rows() - lag);
}

// Residual sum of squares of the least-squares fit of y on X. An empty X
// means the null model. Throws on rank deficiency.
double ols_rss(const Matrix& x, const Vector& y) {
    if (x.cols() == 0) return y.squaredNorm();
    Eigen::ColPivHouseholderQR<Matrix> qr(x);
    if (qr.rank() < x.cols()) {
        throw NumericError("rank-deficient regressor matrix in VAR fit");
    }
    return (y - x * qr.solve(y)).squaredNorm();
}

double f_test_pvalue(double rss_restricted, double rss_unrestricted,
                     int num_df, double den_df) {
    constexpr double tiny = 1e-300;
    if (rss_unrestricted < tiny) {
        return (rss_restricted - rss_unrestricted < tiny) ? 1.0 : 0.0;
    }
    const double diff = std::max(0.0, rss_restricted - rss_unrestricted);
    const double f = (diff / num_df) / (rss_unrestricted / den_df);
    return f_survival(f, num_df, den_df);
}

void check_series(const Matrix& series, int lag) {
    if (lag < 1) throw std::invalid_argument("lag order must be >= 1");
    if (series.cols() < 1) throw std::invalid_argument("series must be non-empty");
    if (series.rows() <= lag) {
        throw std::invalid_argument("series shorter than the lag order");
    }
}

// Self-dependence test shared by both detectors: null model against the
// series' own p lags, denominator df K - p - 1.
bool self_lag_edge(const Matrix& series, int n, int lag, double alpha) {
    const double den_df = static_cast<double>(series.rows()) - lag - 1;
    if (den_df < 1) throw std::invalid_argument("series too short for the F-test");
    Vector y = target_column(series, n, lag);
    const double rss_r = y.squaredNorm();
    const double rss_u = ols_rss(lagged_design(series, {n}, lag), y);
    return f_test_pvalue(rss_r, rss_u, lag, den_df) < alpha;
}

std::vector<int> all_but(int n_vars, int excluded) {
    std::vector<int> vars;
    vars.reserve(n_vars - 1);
    for (int v = 0; v < n_vars; ++v) {
        if (v != excluded) vars.push_back(v);
    }
    return vars;
}

}  // namespace

VarFit fit_var(const Matrix& series, int lag) {
    check_series(series, lag);
    const int n_vars = static_cast<int>(series.cols());
    const auto k = series.rows();
    const double denom = static_cast<double>(k) - lag - n_vars * lag;
    if (k <= static_cast<Eigen::Index>(n_vars) * lag + 1 || denom < 1) {
        throw std::invalid_argument("series too short for VAR(" +
                                    std::to_string(lag) + ") with " +
                                    std::to_string(n_vars) + " variables");
    }

    std::vector<int> all(n_vars);
    for (int v = 0; v < n_vars; ++v) all[v] = v;
    Matrix design = lagged_design(series, all, lag);

    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    if (qr.rank() < design.cols()) {
        throw NumericError("rank-deficient regressor matrix in VAR fit");
    }

    const auto rows = design.rows();
    VarFit fit;
    fit.coefficients.assign(lag, Matrix::Zero(n_vars, n_vars));
    Matrix resid(rows, n_vars);
    for (int n = 0; n < n_vars; ++n) {
        Vector y = target_column(series, n, lag);
        Vector beta = qr.solve(y);
        resid.col(n) = y - design * beta;
        for (int l = 0; l < lag; ++l) {
            for (int m = 0; m < n_vars; ++m) {
                fit.coefficients[l](n, m) = beta(l * n_vars + m);
            }
        }
    }

    fit.residual_covariance = resid.transpose() * resid / denom;
    fit.residuals.reserve(rows);
    for (Eigen::Index t = 0; t < rows; ++t) {
        fit.residuals.push_back(resid.row(t).transpose());
    }
    return fit;
}

BinaryGraph pairwise_gc(const Matrix& series, int lag, double alpha) {
    check_series(series, lag);
    const int n_vars = static_cast<int>(series.cols());
    const double den_df = static_cast<double>(series.rows()) - 2 * lag - 1;
    if (n_vars > 1 && den_df < 1) {
        throw std::invalid_argument("series too short for the pairwise F-test");
    }

    BinaryGraph graph;
    graph.adjacency = BoolMatrix::Constant(n_vars, n_vars, false);
    for (int n = 0; n < n_vars; ++n) {
        Vector y = target_column(series, n, lag);
        const double rss_own = ols_rss(lagged_design(series, {n}, lag), y);
        graph.adjacency(n, n) = self_lag_edge(series, n, lag, alpha);
        for (int m = 0; m < n_vars; ++m) {
            if (m == n) continue;
            // ascending variable order keeps the design bit-identical with
            // conditional_gc in the two-variable case
            const double rss_both = ols_rss(
                lagged_design(series, {std::min(n, m), std::max(n, m)}, lag), y);
            graph.adjacency(n, m) =
                f_test_pvalue(rss_own, rss_both, lag, den_df) < alpha;
        }
    }
    return graph;
}

BinaryGraph conditional_gc(const Matrix& series, int lag, double alpha) {
    check_series(series, lag);
    const int n_vars = static_cast<int>(series.cols());
    const double den_df =
        static_cast<double>(series.rows()) - n_vars * lag - 1;
    if (n_vars > 1 && den_df < 1) {
        throw std::invalid_argument("series too short for the conditional F-test");
    }

    std::vector<int> all(n_vars);
    for (int v = 0; v < n_vars; ++v) all[v] = v;

    BinaryGraph graph;
    graph.adjacency = BoolMatrix::Constant(n_vars, n_vars, false);
    for (int n = 0; n < n_vars; ++n) {
        Vector y = target_column(series, n, lag);
        const double rss_full = ols_rss(lagged_design(series, all, lag), y);
        graph.adjacency(n, n) = self_lag_edge(series, n, lag, alpha);
        for (int m = 0; m < n_vars; ++m) {
            if (m == n) continue;
            const double rss_without =
                ols_rss(lagged_design(series, all_but(n_vars, m), lag), y);
            graph.adjacency(n, m) =
                f_test_pvalue(rss_without, rss_full, lag, den_df) < alpha;
        }
    }
    return graph;
}

}  // namespace graphem
