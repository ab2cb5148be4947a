#include <algorithm>
#include <cmath>
#include <string>

#include "ripe/coverage.hpp"
#include "ripe/error.hpp"
#include "ripe/special.hpp"

namespace ripe {
namespace {

void check_inputs(int n, double q)
{
    if (n < 1) {
        throw Error(ErrorCode::InvalidArgument, "n must be at least 1", "n");
    }
    if (!(q > 0.0 && q < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "credible level must lie in (0, 1)", "level");
    }
}

double log_choose(int n, int r)
{
    return log_gamma(n + 1.0) - log_gamma(r + 1.0) - log_gamma(n - r + 1.0);
}

double binomial_pmf(int n, int r, double theta)
{
    if (theta <= 0.0) {
        return r == 0 ? 1.0 : 0.0;
    }
    if (theta >= 1.0) {
        return r == n ? 1.0 : 0.0;
    }
    return std::exp(log_choose(n, r) + r * std::log(theta) + (n - r) * std::log1p(-theta));
}

SufficientStats simulate(FamilyKind family, const ParamPoint& truth, int n, RngEngine& engine)
{
    switch (family) {
    case FamilyKind::Binomial: {
        int r = 0;
        for (int i = 0; i < n; ++i) {
            r += engine.uniform() < truth[0] ? 1 : 0;
        }
        return BinomialStats{n, r};
    }
    case FamilyKind::Exponential: return ExponentialStats{n, engine.gamma(n, truth[0])};
    case FamilyKind::UniformScale: {
        double m = 0.0;
        for (int i = 0; i < n; ++i) {
            m = std::max(m, truth[0] * engine.uniform_open());
        }
        return UniformStats{n, m};
    }
    case FamilyKind::NormalMeanVar:
    case FamilyKind::NormalMeanOnly: {
        const double sigma = truth[1];
        const double ybar = truth[0] + sigma / std::sqrt(static_cast<double>(n)) * engine.normal();
        const double msd = sigma * sigma * engine.chi_square(n - 1.0) / n;
        return NormalStats{n, ybar, msd};
    }
    case FamilyKind::TwoLevelNormal: break;
    }
    throw Error(ErrorCode::InvalidArgument, "Monte Carlo coverage is not available for the two-level model",
                "family");
}

}  // namespace

std::vector<double> default_theta_grid()
{
    std::vector<double> grid(1001);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid[i] = 0.0005 + 0.999 * static_cast<double>(i) / 1000.0;
    }
    return grid;
}

std::vector<Interval> binomial_regions(int n, Method method, double q)
{
    check_inputs(n, q);
    RegionOptions options;
    options.check_connected = false;
    std::vector<Interval> out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    for (int r = 0; r <= n; ++r) {
        const BinomialModel model({n, r});
        out.push_back(lpl_region(model, method, q, options).intervals.front());
    }
    return out;
}

double binomial_average_coverage(const std::vector<Interval>& regions)
{
    const int n = static_cast<int>(regions.size()) - 1;
    // Integral of the binomial pmf over theta is a Beta(r + 1, n - r + 1) probability / (n + 1).
    double total = 0.0;
    for (int r = 0; r <= n; ++r) {
        const auto& iv = regions[static_cast<std::size_t>(r)];
        const double a = r + 1.0;
        const double b = n - r + 1.0;
        total += beta_inc(a, b, std::clamp(iv.hi, 0.0, 1.0)) - beta_inc(a, b, std::clamp(iv.lo, 0.0, 1.0));
    }
    return total / (n + 1.0);
}

CoverageProfile binomial_coverage_exact(int n, Method method, double q, const std::vector<double>& theta_grid)
{
    check_inputs(n, q);
    for (double t : theta_grid) {
        if (!(t > 0.0 && t < 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "theta grid must lie inside (0, 1)", "theta");
        }
    }
    CoverageProfile p;
    p.family = FamilyKind::Binomial;
    p.method = method;
    p.level = q;
    p.n = n;
    p.theta = theta_grid;
    p.regions = binomial_regions(n, method, q);
    p.coverage.reserve(theta_grid.size());
    for (double t : theta_grid) {
        double c = 0.0;
        for (int r = 0; r <= n; ++r) {
            if (p.regions[static_cast<std::size_t>(r)].contains(t)) {
                c += binomial_pmf(n, r, t);
            }
        }
        p.coverage.push_back(std::min(c, 1.0));
    }
    p.average_coverage = binomial_average_coverage(p.regions);
    for (const auto& iv : p.regions) {
        p.breakpoints.push_back(iv.lo);
        p.breakpoints.push_back(iv.hi);
    }
    std::sort(p.breakpoints.begin(), p.breakpoints.end());
    p.breakpoints.erase(std::unique(p.breakpoints.begin(), p.breakpoints.end()), p.breakpoints.end());
    return p;
}

std::vector<std::pair<int, double>> average_coverage(const std::vector<int>& n_list, Method method, double q)
{
    std::vector<std::pair<int, double>> out;
    for (int n : n_list) {
        out.emplace_back(n, binomial_average_coverage(binomial_regions(n, method, q)));
    }
    return out;
}

McCoverage mc_coverage(FamilyKind family, const ParamPoint& theta_true, int n, Method method, double q,
                       std::size_t replications, RngStream stream, ModelConfig config)
{
    check_inputs(n, q);
    if (replications < 100) {
        throw Error(ErrorCode::InvalidArgument, "at least 100 replications are required", "replications");
    }
    const bool two = family == FamilyKind::NormalMeanVar || family == FamilyKind::NormalMeanOnly;
    if (theta_true.size() != (two ? 2u : 1u)) {
        throw Error(ErrorCode::InvalidParam, "true parameter has the wrong number of coordinates", "theta_true");
    }
    const ParamPoint estimable = family == FamilyKind::NormalMeanOnly ? ParamPoint{theta_true[0]} : theta_true;

    std::size_t hits = 0;
    for (std::size_t i = 0; i < replications; ++i) {
        RngEngine engine(stream.substream(i));
        const auto stats = simulate(family, theta_true, n, engine);
        const auto model = make_model(family, stats, config);
        model->validate_point(estimable);
        const double level = make_loss(*model, method)->value(estimable);
        // theta_true is in the closed region exactly when its sublevel set has mass <= q.
        if (std::isfinite(level) && sublevel_mass(*model, method, level) <= q) {
            ++hits;
        }
    }
    McCoverage out;
    out.replications = replications;
    out.coverage = static_cast<double>(hits) / static_cast<double>(replications);
    out.std_error = std::sqrt(out.coverage * (1.0 - out.coverage) / static_cast<double>(replications));
    return out;
}

}  // namespace ripe
