#include <cmath>
#include <string>

#include "ripe/error.hpp"
#include "ripe/models.hpp"
#include "ripe/numerics.hpp"
#include "ripe/special.hpp"

namespace ripe {
namespace {

double normal_kl(double mu_from, double var_from, double mu_to, double var_to)
{
    const double d = mu_from - mu_to;
    return 0.5 * (d * d / var_to + var_from / var_to - std::log(var_from / var_to) - 1.0);
}

}  // namespace

double NormalPosterior::mean_log_sigma2() const
{
    const double nu = sigma2.p1;
    return std::log(0.5 * nu * sigma2.p2) - digamma(0.5 * nu);
}

NormalModel::NormalModel(NormalStats stats, bool mean_only, ModelConfig config)
    : Model(mean_only ? FamilyKind::NormalMeanOnly : FamilyKind::NormalMeanVar, stats, config),
      normal_(stats),
      mean_only_(mean_only)
{
    if (stats.n < 2) {
        throw Error(ErrorCode::InvalidArgument, "normal model needs at least two observations", "n");
    }
    if (!std::isfinite(stats.ybar)) {
        throw Error(ErrorCode::InvalidArgument, "ybar must be finite", "ybar");
    }
    if (!(stats.msd > 0.0) || !std::isfinite(stats.msd)) {
        throw Error(ErrorCode::InvalidArgument, "mean square deviation must be positive", "msd");
    }
    const double nu = config.normal_prior == NormalPrior::VarianceMeasure ? stats.n - 1.0 : stats.n;
    post_.ybar = stats.ybar;
    post_.n = stats.n;
    post_.sigma2 = Distribution::scaled_inv_chi_sq(nu, sum_sq() / nu);
}

std::vector<std::string> NormalModel::parameter_names() const
{
    if (mean_only_) {
        return {"mu"};
    }
    return {"mu", "sigma"};
}

void NormalModel::validate_point(const ParamPoint& p, bool full) const
{
    const std::size_t dim = (mean_only_ && !full) ? 1 : 2;
    if (p.size() != dim) {
        throw Error(ErrorCode::InvalidParam,
                    "expected a point with " + std::to_string(dim) + " coordinate(s)", "point");
    }
    if (!std::isfinite(p[0])) {
        throw Error(ErrorCode::InvalidParam, "mu must be finite", "mu");
    }
    if (dim == 2 && (!(p[1] > 0.0) || !std::isfinite(p[1]))) {
        throw Error(ErrorCode::InvalidParam, "sigma must be positive", "sigma");
    }
}

double NormalModel::kl(const ParamPoint& from, const ParamPoint& to) const
{
    validate_point(from, true);
    validate_point(to, true);
    return normal_kl(from[0], from[1] * from[1], to[0], to[1] * to[1]);
}

Distribution NormalModel::full_predictive() const
{
    const double nu = this->nu();
    return Distribution::student_t(nu, ybar(), (1.0 + 1.0 / n()) * sum_sq() / nu);
}

Distribution NormalModel::restricted_predictive(double mu_tilde) const
{
    const double nu_r = config().normal_prior == NormalPrior::VarianceMeasure ? n() : n() + 1.0;
    const double d = ybar() - mu_tilde;
    return Distribution::student_t(nu_r, mu_tilde, (sum_sq() + n() * d * d) / nu_r);
}

double NormalModel::log_pred_full(double y, std::size_t) const
{
    if (!std::isfinite(y)) {
        throw Error(ErrorCode::OutOfSupport, "normal observation must be finite", "y");
    }
    return log_density(full_predictive(), y);
}

LogPredictive NormalModel::log_pred_restricted(const ParamPoint& tilde, double y, std::size_t) const
{
    validate_point(tilde);
    if (!std::isfinite(y)) {
        throw Error(ErrorCode::OutOfSupport, "normal observation must be finite", "y");
    }
    if (mean_only_) {
        return {log_density(restricted_predictive(tilde[0]), y), false};
    }
    return {log_density(Distribution::normal(tilde[0], tilde[1] * tilde[1]), y), false};
}

ParamPoint NormalModel::sample_posterior(RngEngine& engine) const
{
    const double s2 = sample(post_.sigma2, engine);
    const double mu = ybar() + std::sqrt(s2 / n()) * engine.normal();
    return {mu, std::sqrt(s2)};
}

ParamPoint NormalModel::project_nuisance(const ParamPoint& tilde, const ParamPoint& full,
                                         KlDirection direction) const
{
    if (!mean_only_) {
        return Model::project_nuisance(tilde, full, direction);
    }
    validate_point(tilde);
    validate_point(full, true);
    const double d = tilde[0] - full[0];
    switch (direction) {
    case KlDirection::RestrictedToFull: return {tilde[0], full[1]};
    case KlDirection::FullToRestricted:
    case KlDirection::Symmetric:
        // log(1 + x) <= x, so the symmetric minimum is attained on the delta_1 branch
        return {tilde[0], std::sqrt(d * d + full[1] * full[1])};
    }
    return {tilde[0], full[1]};
}

ParamPoint NormalModel::project_nuisance_numeric(const ParamPoint& tilde, const ParamPoint& full,
                                                 KlDirection direction) const
{
    if (!mean_only_) {
        return Model::project_nuisance(tilde, full, direction);
    }
    validate_point(tilde);
    validate_point(full, true);
    auto loss = [&](double log_sigma) {
        const ParamPoint r = {tilde[0], std::exp(log_sigma)};
        const double k1 = kl(full, r);
        const double k2 = kl(r, full);
        switch (direction) {
        case KlDirection::FullToRestricted: return k1;
        case KlDirection::RestrictedToFull: return k2;
        case KlDirection::Symmetric: return std::min(k1, k2);
        }
        return k1;
    };
    const double centre = std::log(full[1]);
    const double spread = 2.0 + std::log1p(std::abs(tilde[0] - full[0]) / full[1]);
    const auto r = minimize_1d_scan(loss, {centre - spread, centre + spread}, 1e-12);
    return {tilde[0], std::exp(r.argmin[0])};
}

}  // namespace ripe
