#include <cmath>
#include <string>

#include "ripe/error.hpp"
#include "ripe/models.hpp"
#include "ripe/special.hpp"

namespace ripe {
namespace {

double xlogy_ratio(double x, double num, double den)
{
    if (x == 0.0) {
        return 0.0;
    }
    if (den == 0.0) {
        return kInf;
    }
    return x * std::log(num / den);
}

void require_size(const ParamPoint& p, std::size_t n)
{
    if (p.size() != n) {
        throw Error(ErrorCode::InvalidParam,
                    "expected a point with " + std::to_string(n) + " coordinate(s), got " + std::to_string(p.size()),
                    "point");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Binomial

BinomialModel::BinomialModel(BinomialStats stats, ModelConfig config)
    : Model(FamilyKind::Binomial, stats, config), n_(stats.n), r_(stats.r)
{
    if (stats.n < 1) {
        throw Error(ErrorCode::InvalidArgument, "binomial needs n >= 1", "n");
    }
    if (stats.r < 0 || stats.r > stats.n) {
        throw Error(ErrorCode::InvalidArgument, "binomial needs 0 <= r <= n", "r");
    }
    a_ = r_ + 0.5;
    b_ = n_ - r_ + 0.5;
}

void BinomialModel::validate_point(const ParamPoint& p, bool) const
{
    require_size(p, 1);
    if (!(p[0] >= 0.0 && p[0] <= 1.0)) {
        throw Error(ErrorCode::InvalidParam, "theta must lie in [0, 1]", "theta");
    }
}

double BinomialModel::kl(const ParamPoint& from, const ParamPoint& to) const
{
    validate_point(from);
    validate_point(to);
    const double p = from[0];
    const double q = to[0];
    return xlogy_ratio(p, p, q) + xlogy_ratio(1.0 - p, 1.0 - p, 1.0 - q);
}

double BinomialModel::log_pred_full(double y, std::size_t) const
{
    const double m = posterior_mean();
    if (y == 1.0) {
        return std::log(m);
    }
    if (y == 0.0) {
        return std::log1p(-m);
    }
    throw Error(ErrorCode::OutOfSupport, "binomial observation must be 0 or 1", "y");
}

LogPredictive BinomialModel::log_pred_restricted(const ParamPoint& tilde, double y, std::size_t) const
{
    validate_point(tilde);
    if (y != 0.0 && y != 1.0) {
        throw Error(ErrorCode::OutOfSupport, "binomial observation must be 0 or 1", "y");
    }
    const double p = y == 1.0 ? tilde[0] : 1.0 - tilde[0];
    if (p == 0.0) {
        return {-kInf, true};
    }
    return {std::log(p), false};
}

ParamPoint BinomialModel::sample_posterior(RngEngine& engine) const
{
    return {sample(Distribution::beta(a_, b_), engine)};
}

// ---------------------------------------------------------------------------
// Exponential

ExponentialModel::ExponentialModel(ExponentialStats stats, ModelConfig config)
    : Model(FamilyKind::Exponential, stats, config), n_(stats.n), t_(stats.t)
{
    if (stats.n < 1) {
        throw Error(ErrorCode::InvalidArgument, "exponential needs n >= 1", "n");
    }
    if (!(stats.t > 0.0) || !std::isfinite(stats.t)) {
        throw Error(ErrorCode::InvalidArgument, "exponential needs t > 0", "t");
    }
}

void ExponentialModel::validate_point(const ParamPoint& p, bool) const
{
    require_size(p, 1);
    if (!(p[0] > 0.0) || !std::isfinite(p[0])) {
        throw Error(ErrorCode::InvalidParam, "theta must be positive", "theta");
    }
}

double ExponentialModel::kl(const ParamPoint& from, const ParamPoint& to) const
{
    validate_point(from);
    validate_point(to);
    const double ratio = to[0] / from[0];
    return ratio - 1.0 - std::log(ratio);
}

double ExponentialModel::log_pred_full(double y, std::size_t) const
{
    if (!(y > 0.0)) {
        throw Error(ErrorCode::OutOfSupport, "exponential observation must be positive", "y");
    }
    return log_density(Distribution::gamma_gamma(n_, t_, 1.0), y);
}

LogPredictive ExponentialModel::log_pred_restricted(const ParamPoint& tilde, double y, std::size_t) const
{
    validate_point(tilde);
    if (!(y > 0.0)) {
        throw Error(ErrorCode::OutOfSupport, "exponential observation must be positive", "y");
    }
    return {std::log(tilde[0]) - tilde[0] * y, false};
}

ParamPoint ExponentialModel::sample_posterior(RngEngine& engine) const { return {engine.gamma(n_, t_)}; }

// ---------------------------------------------------------------------------
// Uniform on (0, theta)

UniformModel::UniformModel(UniformStats stats, ModelConfig config)
    : Model(FamilyKind::UniformScale, stats, config), n_(stats.n), t_(stats.t)
{
    if (stats.n < 1) {
        throw Error(ErrorCode::InvalidArgument, "uniform needs n >= 1", "n");
    }
    if (!(stats.t > 0.0) || !std::isfinite(stats.t)) {
        throw Error(ErrorCode::InvalidArgument, "uniform needs t > 0", "t");
    }
}

void UniformModel::validate_point(const ParamPoint& p, bool) const
{
    require_size(p, 1);
    if (!(p[0] > 0.0) || !std::isfinite(p[0])) {
        throw Error(ErrorCode::InvalidParam, "theta must be positive", "theta");
    }
}

double UniformModel::kl(const ParamPoint& from, const ParamPoint& to) const
{
    validate_point(from);
    validate_point(to);
    if (to[0] < from[0]) {
        return kInf;
    }
    return std::log(to[0] / from[0]);
}

double UniformModel::log_pred_full(double y, std::size_t) const
{
    if (!(y > 0.0)) {
        throw Error(ErrorCode::OutOfSupport, "uniform observation must be positive", "y");
    }
    const double lead = std::log(static_cast<double>(n_) / (n_ + 1.0));
    if (y <= t_) {
        return lead - std::log(t_);
    }
    return lead + n_ * std::log(t_) - (n_ + 1.0) * std::log(y);
}

LogPredictive UniformModel::log_pred_restricted(const ParamPoint& tilde, double y, std::size_t) const
{
    validate_point(tilde);
    if (!(y > 0.0)) {
        throw Error(ErrorCode::OutOfSupport, "uniform observation must be positive", "y");
    }
    if (y > tilde[0]) {
        return {-kInf, true};
    }
    return {-std::log(tilde[0]), false};
}

ParamPoint UniformModel::sample_posterior(RngEngine& engine) const
{
    return {sample(Distribution::pareto(n_, t_), engine)};
}

}  // namespace ripe
