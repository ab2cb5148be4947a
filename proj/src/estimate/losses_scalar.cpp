#include <cmath>

#include "losses.hpp"
#include "ripe/error.hpp"
#include "ripe/special.hpp"

namespace ripe::detail {
namespace {

double xlogx(double x) { return x == 0.0 ? 0.0 : x * std::log(x); }

}  // namespace

QuadratureSpec tight_quadrature(Interval domain, std::vector<double> breakpoints)
{
    QuadratureSpec spec;
    spec.domain = domain;
    spec.abs_tol = 1e-13;
    spec.rel_tol = 1e-12;
    spec.max_subdivisions = 2000;
    spec.breakpoints = std::move(breakpoints);
    return spec;
}

// ---------------------------------------------------------------------------
// Binomial, posterior Beta(r + 1/2, n - r + 1/2)

BinomialLoss::BinomialLoss(const BinomialModel& model, Method method)
    : method_(method), a_(model.a()), b_(model.b()), m_(model.posterior_mean())
{
    psi_a_ = digamma(a_);
    psi_b_ = digamma(b_);
    psi_ab_ = digamma(a_ + b_);
    // E[theta log theta + (1 - theta) log(1 - theta)]
    c1_ = m_ * (digamma(a_ + 1.0) - digamma(a_ + b_ + 1.0)) +
          (1.0 - m_) * (digamma(b_ + 1.0) - digamma(a_ + b_ + 1.0));
    log_beta_ = log_beta(a_, b_);
}

std::vector<double> BinomialLoss::scale() const
{
    const double s = a_ + b_;
    return {std::sqrt(a_ * b_ / (s * s * (s + 1.0)))};
}

double BinomialLoss::value_at(double th) const
{
    const double cross = (m_ > 0.0 ? (th > 0.0 ? m_ * std::log(th) : -kInf) : 0.0) +
                         (m_ < 1.0 ? (th < 1.0 ? (1.0 - m_) * std::log1p(-th) : -kInf) : 0.0);
    const double d2 = xlogx(th) + xlogx(1.0 - th) - th * (psi_a_ - psi_ab_) - (1.0 - th) * (psi_b_ - psi_ab_);
    switch (method_) {
    case Method::PredictiveCriterion: return -cross;
    case Method::IntrinsicD1: return c1_ - cross;
    case Method::IntrinsicD2: return d2;
    case Method::IntrinsicD3: break;
    }
    if (th <= 0.0 || th >= 1.0) {
        return d2;  // delta_1 is infinite almost surely at the boundary
    }
    const double log_th = std::log(th);
    const double log_1m = std::log1p(-th);
    // theta = sin^2(phi) absorbs the endpoint singularities of the Beta density
    auto integrand = [&](double phi) {
        const double ls = std::log(std::sin(phi));
        const double lc = std::log(std::cos(phi));
        const double x = std::exp(2.0 * ls);
        const double y = std::exp(2.0 * lc);
        const double lx = 2.0 * ls;
        const double ly = 2.0 * lc;
        const double k1 = x * (lx - log_th) + y * (ly - log_1m);
        const double k2 = th * (log_th - lx) + (1.0 - th) * (log_1m - ly);
        const double w = std::exp((2.0 * a_ - 1.0) * ls + (2.0 * b_ - 1.0) * lc + std::log(2.0) - log_beta_);
        return std::min(k1, k2) * w;
    };
    const double p1 = std::asin(std::sqrt(th));
    const double p2 = std::asin(std::sqrt(1.0 - th));
    return integrate_1d(integrand, tight_quadrature({0.0, M_PI / 2.0}, {p1, p2})).value;
}

double BinomialLoss::derivative_at(double th) const
{
    switch (method_) {
    case Method::PredictiveCriterion:
    case Method::IntrinsicD1: return -m_ / th + (1.0 - m_) / (1.0 - th);
    case Method::IntrinsicD2: return std::log(th) - std::log1p(-th) - (psi_a_ - psi_b_);
    case Method::IntrinsicD3: break;
    }
    const double log_th = std::log(th);
    const double log_1m = std::log1p(-th);
    auto integrand = [&](double phi) {
        const double ls = std::log(std::sin(phi));
        const double lc = std::log(std::cos(phi));
        const double x = std::exp(2.0 * ls);
        const double y = std::exp(2.0 * lc);
        const double lx = 2.0 * ls;
        const double ly = 2.0 * lc;
        const double k1 = x * (lx - log_th) + y * (ly - log_1m);
        const double k2 = th * (log_th - lx) + (1.0 - th) * (log_1m - ly);
        const double dk = k1 <= k2 ? -x / th + y / (1.0 - th) : (log_th - log_1m) - (lx - ly);
        const double w = std::exp((2.0 * a_ - 1.0) * ls + (2.0 * b_ - 1.0) * lc + std::log(2.0) - log_beta_);
        return dk * w;
    };
    const double p1 = std::asin(std::sqrt(th));
    const double p2 = std::asin(std::sqrt(1.0 - th));
    return integrate_1d(integrand, tight_quadrature({0.0, M_PI / 2.0}, {p1, p2})).value;
}

std::optional<double> BinomialLoss::partial(const ParamPoint& tilde, std::size_t) const
{
    if (!(tilde[0] > 0.0 && tilde[0] < 1.0)) {
        return std::nullopt;
    }
    return derivative_at(tilde[0]);
}

// ---------------------------------------------------------------------------
// Exponential, posterior Gamma(n, t)

ExponentialLoss::ExponentialLoss(const ExponentialModel& model, Method method)
    : method_(method), n_(model.n()), t_(model.t()), psi_n_(digamma(model.n()))
{
    if (n_ < 2 && method == Method::PredictiveCriterion) {
        throw Error(ErrorCode::DegenerateCriterion,
                    "predictive criterion needs n >= 2: the full predictive has no finite mean", "n");
    }
    if (n_ < 2 && method == Method::IntrinsicD1) {
        throw Error(ErrorCode::DivergentLoss, "expected delta_1 loss diverges for n = 1", "n");
    }
}

std::vector<Interval> ExponentialLoss::search_box() const
{
    const auto post = Distribution::gamma(n_, t_);
    return {{quantile(post, 1e-10) / 10.0, quantile(post, 1.0 - 1e-10) * 10.0}};
}

double ExponentialLoss::value_at(double th) const
{
    const double log_t = std::log(t_);
    switch (method_) {
    case Method::PredictiveCriterion: return -(std::log(th) - th * t_ / (n_ - 1.0));
    case Method::IntrinsicD1: return t_ * th / (n_ - 1.0) - std::log(th) - log_t - 1.0 + psi_n_;
    case Method::IntrinsicD2: return n_ / (t_ * th) + std::log(th) + log_t - 1.0 - psi_n_;
    case Method::IntrinsicD3: break;
    }
    // delta_2 is the smaller branch below th, delta_1 above
    const auto post = Distribution::gamma(n_, t_);
    auto integrand = [&](double x) {
        const double w = std::exp(log_density(post, x));
        if (w == 0.0) {
            return 0.0;
        }
        const double r = x / th;
        const double k = x < th ? r - 1.0 - std::log(r) : 1.0 / r - 1.0 + std::log(r);
        return k * w;
    };
    return integrate_1d(integrand, tight_quadrature({0.0, kInf}, {th, n_ / t_})).value;
}

double ExponentialLoss::derivative_at(double th) const
{
    switch (method_) {
    case Method::PredictiveCriterion: return -1.0 / th + t_ / (n_ - 1.0);
    case Method::IntrinsicD1: return t_ / (n_ - 1.0) - 1.0 / th;
    case Method::IntrinsicD2: return -n_ / (t_ * th * th) + 1.0 / th;
    case Method::IntrinsicD3: break;
    }
    const double x = t_ * th;
    const double lower = gamma_p(n_, x);
    const double upper = gamma_q(n_, x);
    const double inv_upper = n_ > 1 ? t_ / (n_ - 1.0) * gamma_q(n_ - 1.0, x) : -t_ * std::expint(-x);
    const double mean_lower = n_ / t_ * gamma_p(n_ + 1.0, x);
    return -upper / th + inv_upper + lower / th - mean_lower / (th * th);
}

std::optional<double> ExponentialLoss::partial(const ParamPoint& tilde, std::size_t) const
{
    return derivative_at(tilde[0]);
}

// ---------------------------------------------------------------------------
// Uniform, posterior Pareto(n, t); only the symmetric discrepancy is finite

UniformLoss::UniformLoss(const UniformModel& model, Method method) : n_(model.n()), t_(model.t())
{
    if (method == Method::PredictiveCriterion) {
        throw Error(ErrorCode::DegenerateCriterion,
                    "predictive criterion degenerates for the uniform model: the restricted predictive "
                    "gives zero density to observations above theta",
                    "method");
    }
    if (method != Method::IntrinsicD3) {
        throw Error(ErrorCode::DivergentLoss,
                    "directed KL divergences between uniform models with different supports diverge",
                    "method");
    }
}

std::vector<Interval> UniformLoss::search_box() const
{
    const auto post = Distribution::pareto(n_, t_);
    return {{t_ / 10.0, quantile(post, 1.0 - 1e-10) * 10.0}};
}

double UniformLoss::value_at(double th) const
{
    // E|log theta - log th| with log(theta / t) ~ Exponential(n)
    const double c = std::log(th / t_);
    if (c < 0.0) {
        return -c + 1.0 / n_;
    }
    return c - 1.0 / n_ + 2.0 * std::exp(-n_ * c) / n_;
}

double UniformLoss::derivative_at(double th) const
{
    const double c = std::log(th / t_);
    if (c < 0.0) {
        return -1.0 / th;
    }
    return (1.0 - 2.0 * std::exp(-n_ * c)) / th;
}

std::optional<double> UniformLoss::partial(const ParamPoint& tilde, std::size_t) const
{
    return derivative_at(tilde[0]);
}

}  // namespace ripe::detail
