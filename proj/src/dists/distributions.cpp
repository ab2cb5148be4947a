#include "ripe/distributions.hpp"

#include <cmath>
#include <string>

#include "ripe/error.hpp"
#include "ripe/special.hpp"

namespace ripe {
namespace {

constexpr double kLog2Pi = 1.83787706640934548356;

void require(bool ok, const std::string& message)
{
    if (!ok) {
        throw Error(ErrorCode::InvalidParam, message);
    }
}

bool positive_finite(double x) { return x > 0.0 && std::isfinite(x); }

double student_t_cdf_std(double nu, double x)
{
    const double tail = 0.5 * beta_inc(0.5 * nu, 0.5, nu / (nu + x * x));
    return x > 0.0 ? 1.0 - tail : tail;
}

double binomial_log_pmf(int n, double theta, int k)
{
    const double log_choose = log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0);
    double v = log_choose;
    if (k > 0) {
        v += theta > 0.0 ? k * std::log(theta) : -kInf;
    }
    if (k < n) {
        v += theta < 1.0 ? (n - k) * std::log1p(-theta) : -kInf;
    }
    return v;
}

// Maps an unconstrained coordinate onto the open support so the inversion
// works with relative precision near a finite boundary.
struct SupportMap {
    Interval support;

    double to_y(double u) const
    {
        if (std::isfinite(support.lo) && std::isfinite(support.hi)) {
            const double s = 1.0 / (1.0 + std::exp(-u));
            return support.lo + (support.hi - support.lo) * s;
        }
        if (std::isfinite(support.lo)) {
            return support.lo + std::exp(u);
        }
        return u;
    }

    double to_u(double y) const
    {
        if (std::isfinite(support.lo) && std::isfinite(support.hi)) {
            const double s = (y - support.lo) / (support.hi - support.lo);
            return std::log(s) - std::log1p(-s);
        }
        if (std::isfinite(support.lo)) {
            return std::log(y - support.lo);
        }
        return y;
    }
};

double invert_cdf(const Distribution& d, double p)
{
    const SupportMap map{d.support()};
    double guess = d.mean();
    if (!std::isfinite(guess) || !d.support().contains(guess) || guess == d.support().lo ||
        guess == d.support().hi) {
        guess = std::isfinite(d.support().lo) ? d.support().lo + 1.0 : 0.0;
        if (std::isfinite(d.support().hi)) {
            guess = 0.5 * (d.support().lo + d.support().hi);
        }
    }
    const double u0 = map.to_u(guess);
    auto h = [&](double u) { return cdf(d, map.to_y(u)) - p; };
    double lo = u0 - 1.0;
    double hi = u0 + 1.0;
    double step = 1.0;
    for (int i = 0; i < 200 && h(lo) > 0.0; ++i) {
        step *= 2.0;
        lo = u0 - step;
    }
    step = 1.0;
    for (int i = 0; i < 200 && h(hi) < 0.0; ++i) {
        step *= 2.0;
        hi = u0 + step;
    }
    const double u = find_root(h, {lo, hi}, 1e-15 * std::max(1.0, std::abs(u0)), 400);
    return map.to_y(u);
}

}  // namespace

std::string_view dist_kind_name(DistKind kind)
{
    switch (kind) {
    case DistKind::Normal: return "normal";
    case DistKind::StudentT: return "student_t";
    case DistKind::ScaledInvChiSq: return "scaled_inv_chi_sq";
    case DistKind::Beta: return "beta";
    case DistKind::Gamma: return "gamma";
    case DistKind::Pareto: return "pareto";
    case DistKind::GammaGamma: return "gamma_gamma";
    case DistKind::Binomial: return "binomial";
    }
    return "unknown";
}

Distribution Distribution::normal(double mean, double variance)
{
    require(std::isfinite(mean) && positive_finite(variance), "normal needs finite mean and variance > 0");
    return {DistKind::Normal, mean, variance, 0.0};
}

Distribution Distribution::student_t(double dof, double center, double scale2)
{
    require(positive_finite(dof) && std::isfinite(center) && positive_finite(scale2),
            "student_t needs dof > 0 and scale^2 > 0");
    return {DistKind::StudentT, dof, center, scale2};
}

Distribution Distribution::scaled_inv_chi_sq(double dof, double s2)
{
    require(positive_finite(dof) && positive_finite(s2), "scaled_inv_chi_sq needs dof > 0 and s^2 > 0");
    return {DistKind::ScaledInvChiSq, dof, s2, 0.0};
}

Distribution Distribution::beta(double a, double b)
{
    require(positive_finite(a) && positive_finite(b), "beta needs a > 0 and b > 0");
    return {DistKind::Beta, a, b, 0.0};
}

Distribution Distribution::gamma(double shape, double rate)
{
    require(positive_finite(shape) && positive_finite(rate), "gamma needs shape > 0 and rate > 0");
    return {DistKind::Gamma, shape, rate, 0.0};
}

Distribution Distribution::pareto(double n, double t)
{
    require(positive_finite(n) && positive_finite(t), "pareto needs n > 0 and t > 0");
    return {DistKind::Pareto, n, t, 0.0};
}

Distribution Distribution::gamma_gamma(double n, double t, double k)
{
    require(positive_finite(n) && positive_finite(t) && positive_finite(k),
            "gamma_gamma needs n, t, k > 0");
    return {DistKind::GammaGamma, n, t, k};
}

Distribution Distribution::binomial(int n, double theta)
{
    require(n >= 0 && theta >= 0.0 && theta <= 1.0, "binomial needs n >= 0 and theta in [0, 1]");
    return {DistKind::Binomial, static_cast<double>(n), theta, 0.0};
}

Interval Distribution::support() const
{
    switch (kind) {
    case DistKind::Normal:
    case DistKind::StudentT: return {-kInf, kInf};
    case DistKind::ScaledInvChiSq:
    case DistKind::Gamma:
    case DistKind::GammaGamma: return {0.0, kInf};
    case DistKind::Beta: return {0.0, 1.0};
    case DistKind::Pareto: return {p2, kInf};
    case DistKind::Binomial: return {0.0, p1};
    }
    return {-kInf, kInf};
}

double Distribution::mean() const
{
    switch (kind) {
    case DistKind::Normal: return p1;
    case DistKind::StudentT: return p1 > 1.0 ? p2 : kInf;
    case DistKind::ScaledInvChiSq: return p1 > 2.0 ? p1 * p2 / (p1 - 2.0) : kInf;
    case DistKind::Beta: return p1 / (p1 + p2);
    case DistKind::Gamma: return p1 / p2;
    case DistKind::Pareto: return p1 > 1.0 ? p1 * p2 / (p1 - 1.0) : kInf;
    case DistKind::GammaGamma: return p1 > 1.0 ? p3 * p2 / (p1 - 1.0) : kInf;
    case DistKind::Binomial: return p1 * p2;
    }
    return kInf;
}

double log_density(const Distribution& d, double y)
{
    if (std::isnan(y)) {
        throw Error(ErrorCode::InvalidArgument, "log_density evaluated at NaN");
    }
    switch (d.kind) {
    case DistKind::Normal: {
        const double z = y - d.p1;
        return -0.5 * (kLog2Pi + std::log(d.p2) + z * z / d.p2);
    }
    case DistKind::StudentT: {
        const double nu = d.p1;
        const double z2 = (y - d.p2) * (y - d.p2) / d.p3;
        return log_gamma(0.5 * (nu + 1.0)) - log_gamma(0.5 * nu) - 0.5 * std::log(nu * M_PI * d.p3) -
               0.5 * (nu + 1.0) * std::log1p(z2 / nu);
    }
    case DistKind::ScaledInvChiSq: {
        if (!(y > 0.0)) {
            return -kInf;
        }
        const double h = 0.5 * d.p1;
        const double scale = h * d.p2;
        return h * std::log(scale) - log_gamma(h) - (h + 1.0) * std::log(y) - scale / y;
    }
    case DistKind::Beta: {
        if (!(y > 0.0 && y < 1.0)) {
            return -kInf;
        }
        return (d.p1 - 1.0) * std::log(y) + (d.p2 - 1.0) * std::log1p(-y) - log_beta(d.p1, d.p2);
    }
    case DistKind::Gamma: {
        if (!(y > 0.0)) {
            return -kInf;
        }
        return d.p1 * std::log(d.p2) - log_gamma(d.p1) + (d.p1 - 1.0) * std::log(y) - d.p2 * y;
    }
    case DistKind::Pareto: {
        if (!(y >= d.p2)) {
            return -kInf;
        }
        return std::log(d.p1) + d.p1 * std::log(d.p2) - (d.p1 + 1.0) * std::log(y);
    }
    case DistKind::GammaGamma: {
        if (!(y > 0.0)) {
            return -kInf;
        }
        const double n = d.p1;
        const double t = d.p2;
        const double k = d.p3;
        return n * std::log(t) - log_beta(n, k) + (k - 1.0) * std::log(y) - (n + k) * std::log(t + y);
    }
    case DistKind::Binomial: {
        const int n = static_cast<int>(d.p1);
        if (y != std::floor(y) || y < 0.0 || y > n) {
            return -kInf;
        }
        return binomial_log_pmf(n, d.p2, static_cast<int>(y));
    }
    }
    return -kInf;
}

double cdf(const Distribution& d, double y)
{
    if (std::isnan(y)) {
        throw Error(ErrorCode::InvalidArgument, "cdf evaluated at NaN");
    }
    switch (d.kind) {
    case DistKind::Normal: return normal_cdf((y - d.p1) / std::sqrt(d.p2));
    case DistKind::StudentT: {
        if (std::isinf(y)) {
            return y > 0.0 ? 1.0 : 0.0;
        }
        return student_t_cdf_std(d.p1, (y - d.p2) / std::sqrt(d.p3));
    }
    case DistKind::ScaledInvChiSq:
        return y <= 0.0 ? 0.0 : gamma_q(0.5 * d.p1, 0.5 * d.p1 * d.p2 / y);
    case DistKind::Beta: return beta_inc(d.p1, d.p2, y);
    case DistKind::Gamma: return gamma_p(d.p1, d.p2 * y);
    case DistKind::Pareto: return y <= d.p2 ? 0.0 : -std::expm1(d.p1 * std::log(d.p2 / y));
    case DistKind::GammaGamma: {
        if (y <= 0.0) {
            return 0.0;
        }
        if (d.p3 == 1.0) {
            return -std::expm1(d.p1 * std::log(d.p2 / (d.p2 + y)));
        }
        return beta_inc(d.p3, d.p1, y / (d.p2 + y));
    }
    case DistKind::Binomial: {
        const int n = static_cast<int>(d.p1);
        if (y < 0.0) {
            return 0.0;
        }
        if (y >= n) {
            return 1.0;
        }
        const int k = static_cast<int>(std::floor(y));
        // P(X <= k) = I_{1-theta}(n-k, k+1)
        if (d.p2 <= 0.0) {
            return 1.0;
        }
        if (d.p2 >= 1.0) {
            return 0.0;
        }
        return beta_inc(n - k, k + 1.0, 1.0 - d.p2);
    }
    }
    return 0.0;
}

double quantile(const Distribution& d, double p)
{
    if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(ErrorCode::OutOfSupport, "quantile requires p in [0, 1]", "p");
    }
    const Interval s = d.support();
    if (p == 0.0) {
        return s.lo;
    }
    if (p == 1.0) {
        return s.hi;
    }
    switch (d.kind) {
    case DistKind::Normal: return d.p1 + std::sqrt(d.p2) * normal_quantile(p);
    case DistKind::Pareto: return d.p2 * std::exp(-std::log1p(-p) / d.p1);
    case DistKind::GammaGamma:
        if (d.p3 == 1.0) {
            return d.p2 * std::expm1(-std::log1p(-p) / d.p1);
        }
        return invert_cdf(d, p);
    case DistKind::Binomial: {
        const int n = static_cast<int>(d.p1);
        for (int k = 0; k < n; ++k) {
            if (cdf(d, k) >= p) {
                return k;
            }
        }
        return n;
    }
    default: return invert_cdf(d, p);
    }
}

double sample(const Distribution& d, RngEngine& engine)
{
    switch (d.kind) {
    case DistKind::Normal: return d.p1 + std::sqrt(d.p2) * engine.normal();
    case DistKind::StudentT: {
        const double z = engine.normal();
        const double w = engine.chi_square(d.p1) / d.p1;
        return d.p2 + std::sqrt(d.p3) * z / std::sqrt(w);
    }
    case DistKind::ScaledInvChiSq: return d.p1 * d.p2 / engine.chi_square(d.p1);
    case DistKind::Beta: {
        const double x = engine.gamma(d.p1, 1.0);
        const double y = engine.gamma(d.p2, 1.0);
        return x / (x + y);
    }
    case DistKind::Gamma: return engine.gamma(d.p1, d.p2);
    case DistKind::Pareto: return d.p2 * std::exp(-std::log(engine.uniform_open()) / d.p1);
    case DistKind::GammaGamma: {
        const double theta = engine.gamma(d.p1, d.p2);
        return engine.gamma(d.p3, theta);
    }
    case DistKind::Binomial: {
        const int n = static_cast<int>(d.p1);
        int k = 0;
        for (int i = 0; i < n; ++i) {
            k += engine.uniform() < d.p2 ? 1 : 0;
        }
        return k;
    }
    }
    return 0.0;
}

}  // namespace ripe
