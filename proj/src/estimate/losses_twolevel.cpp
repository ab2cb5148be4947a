#include <algorithm>
#include <cmath>

#include "losses.hpp"
#include "ripe/error.hpp"
#include "ripe/special.hpp"

namespace ripe::detail {
namespace {

constexpr double kLog2Pi = 1.83787706640934548356;

double phi(double z) { return std::isinf(z) ? 0.0 : std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }
double z_phi(double z) { return std::isinf(z) ? 0.0 : z * phi(z); }

// Integral of (a z^2 + b z + c) phi(z) over [l, u].
double truncated_quadratic(double a, double b, double c, double l, double u)
{
    if (!(l < u)) {
        return 0.0;
    }
    const double m0 = l > 0.0 ? normal_sf(l) - normal_sf(u) : normal_cdf(u) - normal_cdf(l);
    const double m1 = phi(l) - phi(u);
    const double m2 = m0 + z_phi(l) - z_phi(u);
    return a * m2 + b * m1 + c * m0;
}

// E[max(a z^2 + b z + c, 0)] for z ~ N(0, 1).
double positive_part_mean(double a, double b, double c)
{
    if (a == 0.0) {
        if (b == 0.0) {
            return std::max(c, 0.0);
        }
        const double z0 = -c / b;
        return b > 0.0 ? truncated_quadratic(0.0, b, c, z0, kInf) : truncated_quadratic(0.0, b, c, -kInf, z0);
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc <= 0.0) {
        return a > 0.0 ? a + c : 0.0;
    }
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    double r1 = q / a;
    double r2 = q != 0.0 ? c / q : -r1;
    if (r1 > r2) {
        std::swap(r1, r2);
    }
    const double inside = truncated_quadratic(a, b, c, r1, r2);
    return a > 0.0 ? (a + c) - inside : inside;
}

}  // namespace

TwoLevelLoss::TwoLevelLoss(const TwoLevelNormalModel& model, Method method) : model_(model), method_(method)
{
    const auto& post = model.grid_posterior();
    const std::size_t groups = model.groups();
    const std::size_t grid = post.tau.size();
    pa_.resize(grid * groups);
    pb_.resize(grid * groups);
    pv_.resize(grid * groups);
    log_pv_.resize(grid * groups);
    sd_.resize(grid);
    for (std::size_t k = 0; k < grid; ++k) {
        for (std::size_t j = 0; j < groups; ++j) {
            const auto g = model.group_predictive(j, post.tau[k]);
            pa_[k * groups + j] = g.a;
            pb_[k * groups + j] = g.b;
            pv_[k * groups + j] = g.var;
            log_pv_[k * groups + j] = std::log(g.var);
        }
        sd_[k] = std::sqrt(post.mu_var[k]);
    }
}

double TwoLevelLoss::value(const ParamPoint& tilde) const
{
    const auto& post = model_.grid_posterior();
    const std::size_t groups = model_.groups();
    std::vector<double> mt(groups);
    std::vector<double> vt(groups);
    std::vector<double> inv_vt(groups);
    std::vector<double> log_vt(groups);
    double pc_const = 0.0;
    for (std::size_t j = 0; j < groups; ++j) {
        const auto g = model_.group_predictive(j, tilde[1]);
        mt[j] = g.a + g.b * tilde[0];
        vt[j] = g.var;
        inv_vt[j] = 1.0 / g.var;
        log_vt[j] = std::log(g.var);
        pc_const += 0.5 * (kLog2Pi + log_vt[j]);
    }

    double total = 0.0;
    for (std::size_t k = 0; k < post.tau.size(); ++k) {
        if (post.weight[k] == 0.0) {
            continue;
        }
        const double s = sd_[k];
        // Group predictive mean minus restricted mean is p z + e, z ~ N(0, 1).
        double a1 = 0.0, b1 = 0.0, c1 = 0.0;
        double a2 = 0.0, b2 = 0.0, c2 = 0.0;
        double pc = pc_const;
        for (std::size_t j = 0; j < groups; ++j) {
            const std::size_t i = k * groups + j;
            const double p = pb_[i] * s;
            const double e = pa_[i] + pb_[i] * post.mu_hat[k] - mt[j];
            const double v = pv_[i];
            const double inv_v = 1.0 / v;
            const double log_r = log_pv_[i] - log_vt[j];
            const double r = v * inv_vt[j];
            a1 += 0.5 * p * p * inv_vt[j];
            b1 += p * e * inv_vt[j];
            c1 += 0.5 * (e * e * inv_vt[j] + r - log_r - 1.0);
            a2 += 0.5 * p * p * inv_v;
            b2 += p * e * inv_v;
            c2 += 0.5 * (e * e * inv_v + vt[j] * inv_v + log_r - 1.0);
            pc += (p * p + e * e + v) * 0.5 * inv_vt[j];
        }
        double loss = 0.0;
        switch (method_) {
        case Method::PredictiveCriterion: loss = pc; break;
        case Method::IntrinsicD1: loss = a1 + c1; break;
        case Method::IntrinsicD2: loss = a2 + c2; break;
        case Method::IntrinsicD3: loss = (a1 + c1) - positive_part_mean(a1 - a2, b1 - b2, c1 - c2); break;
        }
        total += post.weight[k] * loss;
    }
    return total;
}

std::vector<Interval> TwoLevelLoss::search_box() const
{
    const auto& d = model_.data();
    const auto [ylo, yhi] = std::minmax_element(d.ybar.begin(), d.ybar.end());
    const double smax = *std::max_element(d.sigma.begin(), d.sigma.end());
    return {{*ylo - 3.0 * smax, *yhi + 3.0 * smax}, {1e-3, 2.0 * model_.config().tau_grid_max}};
}

ParamPoint TwoLevelLoss::start() const
{
    const auto& post = model_.grid_posterior();
    return {post.mean_mu(), std::max(post.mean_tau(), 1.0)};
}

std::vector<double> TwoLevelLoss::scale() const
{
    const auto& post = model_.grid_posterior();
    double v = 0.0;
    for (std::size_t k = 0; k < post.tau.size(); ++k) {
        v += post.weight[k] * post.mu_var[k];
    }
    return {std::sqrt(v), 0.5 * std::max(post.mean_tau(), 1.0)};
}

}  // namespace ripe::detail
