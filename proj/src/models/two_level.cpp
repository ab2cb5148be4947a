#include <algorithm>
#include <cmath>
#include <string>

#include "ripe/error.hpp"
#include "ripe/models.hpp"

namespace ripe {
namespace {

constexpr double kLog2Pi = 1.83787706640934548356;

}  // namespace

std::pair<double, double> HierarchicalPosterior::alpha_conditional(std::size_t j, double mu, double tau) const
{
    if (tau == 0.0) {
        return {mu, 0.0};
    }
    const double s2 = sigma[j] * sigma[j];
    const double t2 = tau * tau;
    return {(ybar[j] * t2 + mu * s2) / (s2 + t2), s2 * t2 / (s2 + t2)};
}

double HierarchicalPosterior::mean_mu() const
{
    double m = 0.0;
    for (std::size_t k = 0; k < tau.size(); ++k) {
        m += weight[k] * mu_hat[k];
    }
    return m;
}

double HierarchicalPosterior::mean_tau() const
{
    double m = 0.0;
    for (std::size_t k = 0; k < tau.size(); ++k) {
        m += weight[k] * tau[k];
    }
    return m;
}

TwoLevelNormalModel::TwoLevelNormalModel(HierarchicalStats stats, ModelConfig config)
    : Model(FamilyKind::TwoLevelNormal, stats, config), data_(std::move(stats))
{
    if (data_.ybar.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "two-level model needs at least two groups", "ybar");
    }
    if (data_.sigma.size() != data_.ybar.size()) {
        throw Error(ErrorCode::InvalidArgument, "ybar and sigma must have the same length", "sigma");
    }
    for (std::size_t j = 0; j < data_.ybar.size(); ++j) {
        if (!std::isfinite(data_.ybar[j])) {
            throw Error(ErrorCode::InvalidObservation, "group mean " + std::to_string(j) + " is not finite",
                        "ybar");
        }
        if (!(data_.sigma[j] > 0.0) || !std::isfinite(data_.sigma[j])) {
            throw Error(ErrorCode::InvalidObservation,
                        "group sigma " + std::to_string(j) + " must be positive", "sigma");
        }
    }
    if (config.tau_grid_points < 2 || !(config.tau_grid_max > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "tau grid needs at least two points and a positive maximum",
                    "tau_grid");
    }

    const auto k_count = static_cast<std::size_t>(config.tau_grid_points);
    post_.ybar = data_.ybar;
    post_.sigma = data_.sigma;
    post_.tau.resize(k_count);
    post_.weight.resize(k_count);
    post_.mu_hat.resize(k_count);
    post_.mu_var.resize(k_count);
    std::vector<double> log_w(k_count);
    const double step = config.tau_grid_max / static_cast<double>(k_count - 1);
    for (std::size_t k = 0; k < k_count; ++k) {
        const double tau = step * static_cast<double>(k);
        double wsum = 0.0;
        double wy = 0.0;
        for (std::size_t j = 0; j < groups(); ++j) {
            const double w = 1.0 / (data_.sigma[j] * data_.sigma[j] + tau * tau);
            wsum += w;
            wy += w * data_.ybar[j];
        }
        const double mu_hat = wy / wsum;
        double lw = -0.5 * std::log(wsum);
        for (std::size_t j = 0; j < groups(); ++j) {
            const double v = data_.sigma[j] * data_.sigma[j] + tau * tau;
            const double d = data_.ybar[j] - mu_hat;
            lw -= 0.5 * (std::log(v) + d * d / v);
        }
        post_.tau[k] = tau;
        post_.mu_hat[k] = mu_hat;
        post_.mu_var[k] = 1.0 / wsum;
        log_w[k] = lw;
    }
    const double top = *std::max_element(log_w.begin(), log_w.end());
    double total = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
        post_.weight[k] = std::exp(log_w[k] - top);
        total += post_.weight[k];
    }
    cumulative_.resize(k_count);
    double running = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
        post_.weight[k] /= total;
        running += post_.weight[k];
        cumulative_[k] = running;
    }
}

void TwoLevelNormalModel::validate_point(const ParamPoint& p, bool) const
{
    if (p.size() != 2) {
        throw Error(ErrorCode::InvalidParam, "expected a point (mu, sigma_alpha)", "point");
    }
    if (!std::isfinite(p[0])) {
        throw Error(ErrorCode::InvalidParam, "mu must be finite", "mu");
    }
    if (!(p[1] >= 0.0) || !std::isfinite(p[1])) {
        throw Error(ErrorCode::InvalidParam, "sigma_alpha must be nonnegative", "sigma_alpha");
    }
}

TwoLevelNormalModel::GroupPredictive TwoLevelNormalModel::group_predictive(std::size_t j, double tau) const
{
    const double s2 = data_.sigma[j] * data_.sigma[j];
    const double t2 = tau * tau;
    const double b = s2 / (s2 + t2);
    return {data_.ybar[j] * t2 / (s2 + t2), b, s2 + s2 * t2 / (s2 + t2)};
}

double TwoLevelNormalModel::kl(const ParamPoint& from, const ParamPoint& to) const
{
    validate_point(from);
    validate_point(to);
    double total = 0.0;
    for (std::size_t j = 0; j < groups(); ++j) {
        const auto f = group_predictive(j, from[1]);
        const auto g = group_predictive(j, to[1]);
        const double d = (f.a + f.b * from[0]) - (g.a + g.b * to[0]);
        total += 0.5 * (d * d / g.var + f.var / g.var - std::log(f.var / g.var) - 1.0);
    }
    return total;
}

double TwoLevelNormalModel::log_pred_full(double y, std::size_t group) const
{
    if (group >= groups()) {
        throw Error(ErrorCode::InvalidArgument, "group index out of range", "group");
    }
    if (!std::isfinite(y)) {
        throw Error(ErrorCode::OutOfSupport, "observation must be finite", "y");
    }
    double top = -kInf;
    std::vector<double> terms(post_.tau.size());
    for (std::size_t k = 0; k < post_.tau.size(); ++k) {
        const auto p = group_predictive(group, post_.tau[k]);
        const double m = p.a + p.b * post_.mu_hat[k];
        const double v = p.var + p.b * p.b * post_.mu_var[k];
        terms[k] = std::log(post_.weight[k]) - 0.5 * (kLog2Pi + std::log(v) + (y - m) * (y - m) / v);
        top = std::max(top, terms[k]);
    }
    double s = 0.0;
    for (double t : terms) {
        s += std::exp(t - top);
    }
    return top + std::log(s);
}

LogPredictive TwoLevelNormalModel::log_pred_restricted(const ParamPoint& tilde, double y, std::size_t group) const
{
    validate_point(tilde);
    if (group >= groups()) {
        throw Error(ErrorCode::InvalidArgument, "group index out of range", "group");
    }
    if (!std::isfinite(y)) {
        throw Error(ErrorCode::OutOfSupport, "observation must be finite", "y");
    }
    const auto p = group_predictive(group, tilde[1]);
    const double m = p.a + p.b * tilde[0];
    return {-0.5 * (kLog2Pi + std::log(p.var) + (y - m) * (y - m) / p.var), false};
}

ParamPoint TwoLevelNormalModel::sample_posterior(RngEngine& engine) const
{
    const double u = engine.uniform();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    std::size_t k = static_cast<std::size_t>(it - cumulative_.begin());
    k = std::min(k, cumulative_.size() - 1);
    const double mu = post_.mu_hat[k] + std::sqrt(post_.mu_var[k]) * engine.normal();
    return {mu, post_.tau[k]};
}

}  // namespace ripe
