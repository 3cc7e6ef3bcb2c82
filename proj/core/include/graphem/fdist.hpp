#pragma once

namespace graphem {

/// Regularized incomplete beta function I_x(a, b), a, b > 0, x in [0, 1].
/// Continued-fraction evaluation (modified Lentz).
double regularized_incomplete_beta(double a, double b, double x);

/// Upper tail P[F > f] of the F distribution with (d1, d2) degrees of
/// freedom, computed as I_{d2/(d2 + d1 f)}(d2/2, d1/2).
double f_survival(double f, double d1, double d2);

}  // namespace graphem
