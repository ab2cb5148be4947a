#include <cmath>

#include "losses.hpp"
#include "ripe/error.hpp"
#include "ripe/special.hpp"

namespace ripe::detail {
namespace {

constexpr double kLog2Pi = 1.83787706640934548356;

// E[log S; S < s0] for S ~ Gamma(k, 1), evaluated on the smaller side.
double partial_log_moment_lower(double k, double s0)
{
    const auto g = Distribution::gamma(k, 1.0);
    auto f = [&](double s) {
        const double w = std::exp(log_density(g, s));
        return w == 0.0 ? 0.0 : std::log(s) * w;
    };
    if (gamma_p(k, s0) <= 0.5) {
        return integrate_1d(f, tight_quadrature({0.0, s0}, {k - 1.0})).value;
    }
    return digamma(k) - integrate_1d(f, tight_quadrature({s0, kInf}, {k - 1.0})).value;
}

// E[1/X; X >= x0] for X ~ Gamma(k, rate).
double partial_inverse_moment_upper(double k, double rate, double x0)
{
    if (k > 1.0) {
        return rate / (k - 1.0) * gamma_q(k - 1.0, rate * x0);
    }
    const auto g = Distribution::gamma(k, rate);
    auto f = [&](double x) { return std::exp(log_density(g, x)) / x; };
    return integrate_1d(f, tight_quadrature({x0, kInf})).value;
}

}  // namespace

// ---------------------------------------------------------------------------
// Normal, unknown mean and variance

NormalJointLoss::NormalJointLoss(const NormalModel& model, Method method)
    : method_(method), n_(model.n()), ybar_(model.ybar()), sum_sq_(model.sum_sq()), nu_(model.nu())
{
    shape_ = 0.5 * nu_;
    rate_ = 0.5 * sum_sq_;
    mean_log_x_ = digamma(shape_) - std::log(rate_);
    if (nu_ <= 2.0 && method == Method::PredictiveCriterion) {
        throw Error(ErrorCode::DegenerateCriterion,
                    "predictive criterion needs more observations: the full predictive has infinite variance", "n");
    }
    if (nu_ <= 2.0 && method == Method::IntrinsicD1) {
        throw Error(ErrorCode::DivergentLoss, "expected delta_1 loss diverges: E[sigma^2] is infinite", "n");
    }
}

NormalJointLoss::Profile NormalJointLoss::profile(double sigma) const
{
    const double v = sigma * sigma;
    const double inv_n = 1.0 / n_;
    Profile p;
    double da_dv = 0.0;
    double db_dv = 0.0;
    switch (method_) {
    case Method::PredictiveCriterion: {
        const double e1 = sum_sq_ / (nu_ - 2.0);
        p.a = 0.5 * (kLog2Pi + std::log(v)) + (1.0 + inv_n) * e1 / (2.0 * v);
        p.b = 0.5 / v;
        da_dv = 0.5 / v - (1.0 + inv_n) * e1 / (2.0 * v * v);
        db_dv = -0.5 / (v * v);
        break;
    }
    case Method::IntrinsicD1: {
        const double e1 = sum_sq_ / (nu_ - 2.0);
        p.a = 0.5 * ((1.0 + inv_n) * e1 / v + std::log(v) + mean_log_x_ - 1.0);
        p.b = 0.5 / v;
        da_dv = 0.5 * (-(1.0 + inv_n) * e1 / (v * v) + 1.0 / v);
        db_dv = -0.5 / (v * v);
        break;
    }
    case Method::IntrinsicD2: {
        const double ex = shape_ / rate_;
        p.a = 0.5 * (inv_n + v * ex - mean_log_x_ - std::log(v) - 1.0);
        p.b = 0.5 * ex;
        da_dv = 0.5 * (ex - 1.0 / v);
        db_dv = 0.0;
        break;
    }
    case Method::IntrinsicD3: {
        // With X = 1/sigma^2, delta_2 is the smaller branch when X < 1/v.
        const double x0 = 1.0 / v;
        const double s0 = rate_ * x0;
        const double p_lo = gamma_p(shape_, s0);
        const double p_hi = gamma_q(shape_, s0);
        const double ex_lo = shape_ / rate_ * gamma_p(shape_ + 1.0, s0);
        const double einv_hi = partial_inverse_moment_upper(shape_, rate_, x0);
        const double log_lo = partial_log_moment_lower(shape_, s0) - std::log(rate_) * p_lo;
        const double log_hi = mean_log_x_ - log_lo;
        const double lv = std::log(v);
        p.a = 0.5 * ((inv_n - lv - 1.0) * p_lo + v * ex_lo - log_lo) +
              0.5 * ((1.0 + inv_n) * einv_hi / v + (lv - 1.0) * p_hi + log_hi);
        p.b = 0.5 * ex_lo + 0.5 * p_hi / v;
        da_dv = 0.5 * (ex_lo - p_lo / v) + 0.5 * (-(1.0 + inv_n) * einv_hi / (v * v) + p_hi / v);
        db_dv = -0.5 * p_hi / (v * v);
        break;
    }
    }
    p.da = da_dv * 2.0 * sigma;
    p.db = db_dv * 2.0 * sigma;
    return p;
}

double NormalJointLoss::value(const ParamPoint& tilde) const
{
    const auto p = profile(tilde[1]);
    const double d = tilde[0] - ybar_;
    return p.a + p.b * d * d;
}

std::optional<double> NormalJointLoss::partial(const ParamPoint& tilde, std::size_t coord) const
{
    const auto p = profile(tilde[1]);
    const double d = tilde[0] - ybar_;
    if (coord == 0) {
        return 2.0 * p.b * d;
    }
    return p.da + p.db * d * d;
}

std::vector<Interval> NormalJointLoss::search_box() const
{
    const auto post = Distribution::scaled_inv_chi_sq(nu_, sum_sq_ / nu_);
    const double half = 50.0 * std::sqrt(sum_sq_ / nu_ / n_);
    return {{ybar_ - half, ybar_ + half},
            {std::sqrt(quantile(post, 1e-10)) / 3.0, std::sqrt(quantile(post, 1.0 - 1e-10)) * 3.0}};
}

ParamPoint NormalJointLoss::start() const { return {ybar_, std::sqrt(sum_sq_ / nu_)}; }

std::vector<double> NormalJointLoss::scale() const
{
    const double s = std::sqrt(sum_sq_ / nu_);
    return {s / std::sqrt(static_cast<double>(n_)), s / std::sqrt(2.0 * nu_)};
}

// ---------------------------------------------------------------------------
// Normal mean with nuisance sigma

NormalMeanOnlyLoss::NormalMeanOnlyLoss(const NormalModel& model, Method method)
    : model_(model), method_(method), shape_(0.5 * model.nu()), rate_(0.5 * model.sum_sq())
{
}

std::vector<double> NormalMeanOnlyLoss::scale() const
{
    return {std::sqrt(model_.sum_sq() / model_.nu() / model_.n())};
}

std::vector<Interval> NormalMeanOnlyLoss::search_box() const
{
    const double half = 50.0 * scale()[0];
    return {{model_.ybar() - half, model_.ybar() + half}};
}

double NormalMeanOnlyLoss::value_at(double mu) const
{
    const double c = model_.ybar() - mu;
    const double n = model_.n();
    switch (method_) {
    case Method::PredictiveCriterion: {
        const auto full = model_.full_predictive();
        const auto restricted = model_.restricted_predictive(mu);
        auto f = [&](double y) {
            const double w = std::exp(log_density(full, y));
            return w == 0.0 ? 0.0 : -log_density(restricted, y) * w;
        };
        return integrate_1d(f, tight_quadrature({-kInf, kInf}, {model_.ybar(), mu})).value;
    }
    case Method::IntrinsicD2: return 0.5 * (c * c * shape_ / rate_ + 1.0 / n);
    case Method::IntrinsicD1:
    case Method::IntrinsicD3: break;
    }
    // E[1/2 log(1 + (mu - mu_tilde)^2 / sigma^2)] with mu - ybar = sigma Z / sqrt(n)
    // and 1/sigma^2 = S / rate, S ~ Gamma(shape, 1).
    const double root_n = std::sqrt(n);
    auto inner = [&](double w) {
        auto g = [&](double z) {
            const double u = z / root_n + w;
            return 0.5 * std::log1p(u * u) * std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
        };
        return integrate_1d(g, tight_quadrature({-kInf, kInf}, {-w * root_n})).value;
    };
    if (c == 0.0) {
        return inner(0.0);
    }
    const auto s_dist = Distribution::gamma(shape_, 1.0);
    auto outer = [&](double s) {
        const double w = std::exp(log_density(s_dist, s));
        return w == 0.0 ? 0.0 : inner(c * std::sqrt(s / rate_)) * w;
    };
    return integrate_1d(outer, tight_quadrature({0.0, kInf}, {shape_})).value;
}

std::optional<double> NormalMeanOnlyLoss::partial(const ParamPoint& tilde, std::size_t) const
{
    if (method_ == Method::IntrinsicD2) {
        return -(model_.ybar() - tilde[0]) * shape_ / rate_;
    }
    return std::nullopt;
}

}  // namespace ripe::detail
