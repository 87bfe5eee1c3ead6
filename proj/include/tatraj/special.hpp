#pragma once

namespace tatraj {

// ln Gamma(x) for x > 0. Lanczos (g = 7, 9 terms) away from the zeros at 1
// and 2, a zeta-series expansion within 0.25 of them so relative accuracy
// holds there too. Throws DomainError for x <= 0 or NaN.
double log_gamma(double x);

// d/dx ln Gamma(x) for x > 0: upward recurrence to x >= 10, then the
// asymptotic Bernoulli series. Throws DomainError for x <= 0 or NaN.
double digamma(double x);

// d/dx digamma(x) for x > 0, same scheme. Used for Dirichlet moment
// starts and curvature checks.
double trigamma(double x);

}  // namespace tatraj
