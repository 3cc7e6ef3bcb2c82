#include "graphem/fdist.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace graphem {

namespace {

// Continued fraction for I_x(a, b), evaluated with the modified Lentz scheme.
// Converges fast for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const int max_terms = 500;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;

    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;

    for (int m = 1; m <= max_terms; ++m) {
        const double m2 = 2.0 * m;
        // even step
        double num = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + num * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + num / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        // odd step
        num = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + num * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + num / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < eps) break;
    }
    return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0) || !(b > 0)) {
        throw std::invalid_argument("incomplete beta requires a, b > 0");
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::invalid_argument("incomplete beta requires x in [0, 1]");
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;

    const double log_prefactor = a * std::log(x) + b * std::log1p(-x) -
                                 (std::lgamma(a) + std::lgamma(b) -
                                  std::lgamma(a + b));
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return std::exp(log_prefactor) * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 -
           std::exp(log_prefactor) * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_survival(double f, double d1, double d2) {
    if (!(d1 > 0) || !(d2 > 0)) {
        throw std::invalid_argument("degrees of freedom must be positive");
    }
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    return regularized_incomplete_beta(0.5 * d2, 0.5 * d1,
                                       d2 / (d2 + d1 * f));
}

}  // namespace graphem
