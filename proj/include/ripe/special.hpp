#pragma once

namespace ripe {

/// log Gamma(x) for x > 0. Throws DomainError otherwise.
double log_gamma(double x);

/// psi(x) = d/dx log Gamma(x) for x > 0. Throws DomainError otherwise.
double digamma(double x);

double log_beta(double a, double b);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), accurate in the tail.
double gamma_q(double a, double x);

/// Regularized incomplete beta I_x(a, b).
double beta_inc(double a, double b, double x);

double normal_cdf(double x);

/// Upper tail 1 - Phi(x) without cancellation.
double normal_sf(double x);

/// Inverse of the standard normal CDF for p in (0, 1).
double normal_quantile(double p);

}  // namespace ripe
