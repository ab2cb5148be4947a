#pragma once

#include <string_view>

#include "ripe/numerics.hpp"
#include "ripe/rng.hpp"

namespace ripe {

enum class DistKind {
    Normal,          // (mean, variance)
    StudentT,        // (dof, center, scale^2)
    ScaledInvChiSq,  // (dof, s^2): dof*s^2/x is chi-square with dof degrees of freedom
    Beta,            // (a, b)
    Gamma,           // (shape, rate)
    Pareto,          // (n, t): density n t^n x^-(n+1) on [t, inf)
    GammaGamma,      // (n, t, k): Gamma(k, theta) mixed over theta ~ Gamma(n, t)
    Binomial,        // (n, theta)
};

std::string_view dist_kind_name(DistKind kind);

/// Parameterized univariate law. Construct through the named factories,
/// which validate the parameters (InvalidParam).
struct Distribution {
    DistKind kind = DistKind::Normal;
    double p1 = 0.0;
    double p2 = 1.0;
    double p3 = 0.0;

    static Distribution normal(double mean, double variance);
    static Distribution student_t(double dof, double center, double scale2);
    static Distribution scaled_inv_chi_sq(double dof, double s2);
    static Distribution beta(double a, double b);
    static Distribution gamma(double shape, double rate);
    static Distribution pareto(double n, double t);
    static Distribution gamma_gamma(double n, double t, double k = 1.0);
    static Distribution binomial(int n, double theta);

    Interval support() const;
    bool discrete() const { return kind == DistKind::Binomial; }

    /// Mean, or +inf when it does not exist.
    double mean() const;
};

/// Log density (log mass for Binomial). Returns -inf outside the support.
double log_density(const Distribution& d, double y);

double cdf(const Distribution& d, double y);

/// Generalized inverse of the CDF. For Binomial, the smallest k with cdf(k) >= p.
/// Throws OutOfSupport unless 0 <= p <= 1.
double quantile(const Distribution& d, double p);

double sample(const Distribution& d, RngEngine& engine);

}  // namespace ripe
