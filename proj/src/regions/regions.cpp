#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "../estimate/losses.hpp"
#include "ripe/error.hpp"
#include "ripe/regions.hpp"
#include "ripe/special.hpp"

namespace ripe {
namespace {

constexpr double kMassTol1d = 1e-4;
constexpr double kMassTolGrid = 5e-3;

double or_inf(double v) { return std::isnan(v) ? kInf : v; }

void check_level(double q)
{
    if (!(q > 0.0 && q < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "credible level must lie in (0, 1)", "level");
    }
}

bool is_grid_family(FamilyKind kind)
{
    return kind == FamilyKind::NormalMeanVar || kind == FamilyKind::TwoLevelNormal;
}

// Posterior marginal of the estimable coordinate.
Distribution marginal_1d(const Model& model)
{
    switch (model.kind()) {
    case FamilyKind::Binomial:
    case FamilyKind::Exponential:
    case FamilyKind::UniformScale: return std::get<Distribution>(model.posterior());
    case FamilyKind::NormalMeanOnly: {
        const auto& m = static_cast<const NormalModel&>(model);
        return Distribution::student_t(m.nu(), m.ybar(), m.sum_sq() / (m.nu() * m.n()));
    }
    default: break;
    }
    throw Error(ErrorCode::InvalidArgument, "family has no one-dimensional region", "family");
}

Interval natural_domain(FamilyKind kind)
{
    switch (kind) {
    case FamilyKind::Binomial: return {0.0, 1.0};
    case FamilyKind::Exponential:
    case FamilyKind::UniformScale: return {0.0, kInf};
    default: return {-kInf, kInf};
    }
}

// Sublevel sets {x : d(x) <= l} of a unimodal one-dimensional loss.
class Sublevel1d {
public:
    Sublevel1d(const LossFunction& loss, Interval domain, std::function<double(double, double)> mass_of)
        : loss_(loss), domain_(domain), mass_of_(std::move(mass_of)), log_(loss.log_scale()[0])
    {
        const auto est = minimize_loss(loss);
        x_star_ = est.point[0];
        d_star_ = est.expected_loss;
        u_star_ = to_u(x_star_);
        const double s = loss.scale()[0];
        step_ = log_ ? std::min(s / x_star_, 1.0) : s;
        dom_u_ = {to_u(domain.lo), to_u(domain.hi)};
    }

    double x_star() const { return x_star_; }
    double d_star() const { return d_star_; }
    double value(double x) const { return loss_.value({x}); }

    Interval interval(double l) const { return {endpoint(l, -1), endpoint(l, +1)}; }
    double mass(double l) const
    {
        const auto iv = interval(l);
        return mass_of_(iv.lo, iv.hi);
    }

    // Scans around the interval for sublevel points it misses.
    bool disconnected(double l, Interval iv) const
    {
        double a = to_u(iv.lo);
        double b = to_u(iv.hi);
        if (!std::isfinite(a) || !std::isfinite(b)) {
            return false;
        }
        const double w = std::max(b - a, step_);
        const double lo = std::max(a - w, dom_u_.lo);
        const double hi = std::min(b + w, dom_u_.hi);
        constexpr int kPoints = 256;
        for (int i = 0; i <= kPoints; ++i) {
            const double u = lo + (hi - lo) * i / kPoints;
            if (u >= a && u <= b) {
                continue;
            }
            const double x = to_x(u);
            if (x <= domain_.lo || x >= domain_.hi) {
                continue;
            }
            if (value(x) <= l) {
                return true;
            }
        }
        return false;
    }

private:
    double to_u(double x) const { return log_ ? std::log(x) : x; }
    double to_x(double u) const { return log_ ? std::exp(u) : u; }

    double endpoint(double l, int dir) const
    {
        auto f = [&](double u) {
            const double v = value(to_x(u)) - l;
            return std::isfinite(v) ? v : 1e300;
        };
        const double boundary_u = dir > 0 ? dom_u_.hi : dom_u_.lo;
        const double boundary_x = dir > 0 ? domain_.hi : domain_.lo;
        double prev = u_star_;
        for (int k = 0; k < 64; ++k) {
            double u = u_star_ + dir * step_ * std::ldexp(1.0, k);
            const bool beyond = dir > 0 ? u >= boundary_u : u <= boundary_u;
            if (beyond && std::isfinite(boundary_u)) {
                if (or_inf(value(boundary_x)) <= l) {
                    return boundary_x;
                }
                u = boundary_u;
            }
            const double x = to_x(u);
            if (!(x > domain_.lo && x < domain_.hi) && !std::isfinite(boundary_u)) {
                return boundary_x;  // sublevel set reaches an open end of the domain
            }
            if (f(u) > 0.0) {
                const Interval bracket = dir > 0 ? Interval{prev, u} : Interval{u, prev};
                const double xtol = 1e-13 * (1.0 + std::abs(prev));
                return to_x(find_root(f, bracket, xtol));
            }
            prev = u;
        }
        return boundary_x;
    }

    const LossFunction& loss_;
    Interval domain_;
    std::function<double(double, double)> mass_of_;
    bool log_;
    double x_star_ = 0.0;
    double d_star_ = 0.0;
    double u_star_ = 0.0;
    double step_ = 1.0;
    Interval dom_u_;
};

// Everything a one-dimensional region needs, optionally in a transformed coordinate.
struct Problem1d {
    std::unique_ptr<LossFunction> base;
    std::unique_ptr<detail::TransformedLoss> transformed;
    std::unique_ptr<Sublevel1d> sublevel;

    Problem1d(const Model& model, Method method, const std::optional<Transform>& transform)
    {
        base = make_loss(model, method);
        const Distribution post = marginal_1d(model);
        const Interval support = post.support();
        Interval domain = natural_domain(model.kind());
        std::function<double(double)> to_theta = [](double x) { return x; };
        const LossFunction* loss = base.get();
        if (transform && transform->name != "identity") {
            transformed = std::make_unique<detail::TransformedLoss>(*base, *transform);
            loss = transformed.get();
            const double a = transform->forward(domain.lo);
            const double b = transform->forward(domain.hi);
            domain = {std::min(a, b), std::max(a, b)};
            to_theta = transform->inverse;
        }
        auto cdf_at = [post, support](double theta) {
            if (!(theta > support.lo)) {
                return 0.0;
            }
            if (!(theta < support.hi)) {
                return 1.0;
            }
            return cdf(post, theta);
        };
        auto mass_of = [cdf_at, to_theta](double a, double b) {
            return std::abs(cdf_at(to_theta(b)) - cdf_at(to_theta(a)));
        };
        sublevel = std::make_unique<Sublevel1d>(*loss, domain, mass_of);
    }
};

LplRegion region_1d(const Model& model, Method method, double q, const RegionOptions& options)
{
    const double mass_tol = options.mass_tol > 0.0 ? options.mass_tol : kMassTol1d;
    const Problem1d problem(model, method, options.transform);
    const Sublevel1d& s = *problem.sublevel;

    auto mass = [&](double l) { return s.mass(l); };
    double width = 1e-3 * (1.0 + std::abs(s.d_star()));
    double l_hi = s.d_star() + width;
    for (int k = 0; k < 200 && mass(l_hi) < q; ++k) {
        width *= 2.0;
        l_hi = s.d_star() + width;
    }
    const double l = find_threshold(mass, q, {s.d_star(), l_hi}, 1e-3 * mass_tol);

    LplRegion region;
    region.family = model.kind();
    region.method = method;
    region.level = q;
    region.threshold = l;
    region.mass_tol = mass_tol;
    region.estimate = {s.x_star()};
    region.estimate_loss = s.d_star();
    region.intervals = {s.interval(l)};
    region.mass = s.mass(l);
    if (options.transform) {
        region.coordinate = options.transform->name;
    }
    if (std::abs(region.mass - q) > mass_tol) {
        throw Error(ErrorCode::NonConvergence, "region mass " + std::to_string(region.mass) +
                                                   " misses the level by more than mass_tol");
    }
    if (options.check_connected) {
        region.disconnected = s.disconnected(l, region.intervals.front());
    }
    return region;
}

// ---------------------------------------------------------------------------
// Joint normal: d = A(sigma) + B(sigma) (mu - ybar)^2

class NormalSublevel {
public:
    NormalSublevel(const NormalModel& model, Method method) : model_(model), loss_(model, method)
    {
        const auto est = minimize_loss(loss_);
        estimate_ = est.point;
        d_star_ = est.expected_loss;
        const auto box = loss_.search_box()[1];
        const auto a = minimize_1d([&](double u) { return loss_.profile(std::exp(u)).a; },
                                   {std::log(box.lo), std::log(box.hi)}, 1e-10);
        log_sigma_a_ = a.argmin[0];
        a_min_ = a.min_value;
    }

    const ParamPoint& estimate() const { return estimate_; }
    double d_star() const { return d_star_; }
    const detail::NormalJointLoss& loss() const { return loss_; }

    /// Sigma range where A(sigma) <= l, as log sigma.
    std::optional<Interval> log_sigma_range(double l) const
    {
        if (l <= a_min_) {
            return std::nullopt;
        }
        auto f = [&](double u) {
            const double v = loss_.profile(std::exp(u)).a - l;
            return std::isfinite(v) ? v : 1e300;
        };
        auto side = [&](int dir) {
            double prev = log_sigma_a_;
            for (int k = 0; k < 60; ++k) {
                const double u = log_sigma_a_ + dir * 0.1 * std::ldexp(1.0, k);
                if (f(u) > 0.0) {
                    return find_root(f, dir > 0 ? Interval{prev, u} : Interval{u, prev}, 1e-13);
                }
                prev = u;
            }
            throw Error(ErrorCode::NonConvergence, "sigma range of the sublevel set is unbounded");
        };
        return Interval{side(-1), side(+1)};
    }

    double mass(double l) const
    {
        const auto range = log_sigma_range(l);
        if (!range) {
            return 0.0;
        }
        const auto& sigma2 = model_.normal_posterior().sigma2;
        const double root_n = std::sqrt(static_cast<double>(model_.n()));
        auto integrand = [&](double u) {
            const double sigma = std::exp(u);
            const auto p = loss_.profile(sigma);
            if (!(l > p.a)) {
                return 0.0;
            }
            const double half = std::sqrt((l - p.a) / p.b);
            const double inner = 1.0 - 2.0 * normal_sf(half * root_n / sigma);
            const double v = sigma * sigma;
            return std::exp(log_density(sigma2, v)) * 2.0 * v * inner;
        };
        QuadratureSpec spec;
        spec.domain = *range;
        spec.abs_tol = 1e-11;
        spec.rel_tol = 1e-10;
        spec.max_subdivisions = 1000;
        return integrate_1d(integrand, spec).value;
    }

private:
    const NormalModel& model_;
    detail::NormalJointLoss loss_;
    ParamPoint estimate_;
    double d_star_ = 0.0;
    double log_sigma_a_ = 0.0;
    double a_min_ = 0.0;
};

LplRegion normal_region(const NormalModel& model, Method method, double q, const RegionOptions& options)
{
    const double mass_tol = options.mass_tol > 0.0 ? options.mass_tol : kMassTolGrid;
    const NormalSublevel s(model, method);
    auto mass = [&](double l) { return s.mass(l); };
    double width = 1e-3 * (1.0 + std::abs(s.d_star()));
    double l_hi = s.d_star() + width;
    for (int k = 0; k < 200 && mass(l_hi) < q; ++k) {
        width *= 2.0;
        l_hi = s.d_star() + width;
    }
    const double l = find_threshold(mass, q, {s.d_star(), l_hi}, 1e-8);

    const auto& sigma2 = model.normal_posterior().sigma2;
    const auto mu_marginal = Distribution::student_t(model.nu(), model.ybar(), model.sum_sq() / (model.nu() * model.n()));
    const double tail = options.grid.tail;
    GridMask mask;
    mask.nx = options.grid.nx > 0 ? options.grid.nx : 512;
    mask.ny = options.grid.ny > 0 ? options.grid.ny : 512;
    mask.x = {quantile(mu_marginal, 0.5 * tail), quantile(mu_marginal, 1.0 - 0.5 * tail)};
    mask.y = {std::sqrt(quantile(sigma2, 0.5 * tail)), std::sqrt(quantile(sigma2, 1.0 - 0.5 * tail))};
    mask.inside.assign(mask.nx * mask.ny, 0);

    const auto range = s.log_sigma_range(l);
    if (range && (std::exp(range->lo) < mask.y.lo || std::exp(range->hi) > mask.y.hi)) {
        throw Error(ErrorCode::GridTooCoarse, "grid bounds do not cover the region; lower the tail probability",
                    "grid");
    }

    const double root_n = std::sqrt(static_cast<double>(model.n()));
    const double ybar = model.ybar();
    double grid_mass = 0.0;
    for (std::size_t iy = 0; iy < mask.ny; ++iy) {
        const double s_lo = mask.y.lo + static_cast<double>(iy) * mask.dy();
        const double s_hi = s_lo + mask.dy();
        const double sc = mask.y_centre(iy);
        const double row_mass = cdf(sigma2, s_hi * s_hi) - cdf(sigma2, s_lo * s_lo);
        const auto p = s.loss().profile(sc);
        for (std::size_t ix = 0; ix < mask.nx; ++ix) {
            const double mc = mask.x_centre(ix);
            const double d = p.a + p.b * (mc - ybar) * (mc - ybar);
            if (d <= l) {
                mask.inside[iy * mask.nx + ix] = 1;
                const double z0 = (mc - 0.5 * mask.dx() - ybar) * root_n / sc;
                const double z1 = (mc + 0.5 * mask.dx() - ybar) * root_n / sc;
                grid_mass += row_mass * (normal_cdf(z1) - normal_cdf(z0));
            }
        }
    }

    LplRegion region;
    region.family = model.kind();
    region.method = method;
    region.level = q;
    region.threshold = l;
    region.mass_tol = mass_tol;
    region.estimate = s.estimate();
    region.estimate_loss = s.d_star();
    region.mass = grid_mass;
    region.mask = std::move(mask);
    if (std::abs(grid_mass - q) > mass_tol) {
        throw Error(ErrorCode::GridTooCoarse,
                    "grid mass " + std::to_string(grid_mass) + " differs from the level by more than mass_tol",
                    "grid");
    }
    return region;
}

// ---------------------------------------------------------------------------
// Two-level normal: cells ranked by expected loss

struct TwoLevelGrid {
    GridMask mask;
    std::vector<double> loss;
    std::vector<double> cell_mass;
};

TwoLevelGrid two_level_grid(const TwoLevelNormalModel& model, const detail::TwoLevelLoss& loss, const GridSpec& spec)
{
    const auto& post = model.grid_posterior();
    const double m = post.mean_mu();
    double var = 0.0;
    for (std::size_t k = 0; k < post.tau.size(); ++k) {
        var += post.weight[k] * (post.mu_var[k] + (post.mu_hat[k] - m) * (post.mu_hat[k] - m));
    }
    const double tail = std::max(spec.tail, 1e-4);
    double cum = 0.0;
    double tau_top = post.tau.back();
    for (std::size_t k = 0; k < post.tau.size(); ++k) {
        cum += post.weight[k];
        if (cum >= 1.0 - tail) {
            tau_top = post.tau[k];
            break;
        }
    }
    TwoLevelGrid g;
    g.mask.nx = spec.nx > 0 ? spec.nx : 128;
    g.mask.ny = spec.ny > 0 ? spec.ny : 128;
    const double half = -normal_quantile(0.5 * tail) * std::sqrt(var) * 1.5;
    g.mask.x = {m - half, m + half};
    g.mask.y = {0.0, tau_top};
    const std::size_t cells = g.mask.nx * g.mask.ny;
    g.mask.inside.assign(cells, 0);
    g.loss.resize(cells);
    g.cell_mass.assign(cells, 0.0);
    for (std::size_t k = 0; k < post.tau.size(); ++k) {
        if (post.tau[k] >= g.mask.y.hi && k + 1 < post.tau.size()) {
            continue;
        }
        const auto iy = std::min(static_cast<std::size_t>(post.tau[k] / g.mask.dy()), g.mask.ny - 1);
        const double sd = std::sqrt(post.mu_var[k]);
        for (std::size_t ix = 0; ix < g.mask.nx; ++ix) {
            const double x0 = g.mask.x.lo + static_cast<double>(ix) * g.mask.dx();
            const double p = normal_cdf((x0 + g.mask.dx() - post.mu_hat[k]) / sd) - normal_cdf((x0 - post.mu_hat[k]) / sd);
            g.cell_mass[iy * g.mask.nx + ix] += post.weight[k] * p;
        }
    }
    for (std::size_t iy = 0; iy < g.mask.ny; ++iy) {
        for (std::size_t ix = 0; ix < g.mask.nx; ++ix) {
            g.loss[iy * g.mask.nx + ix] = loss.value({g.mask.x_centre(ix), g.mask.y_centre(iy)});
        }
    }
    return g;
}

LplRegion two_level_region(const TwoLevelNormalModel& model, Method method, double q, const RegionOptions& options)
{
    const double mass_tol = options.mass_tol > 0.0 ? options.mass_tol : kMassTolGrid;
    const detail::TwoLevelLoss loss(model, method);
    const auto est = minimize_loss(loss);
    TwoLevelGrid g = two_level_grid(model, loss, options.grid);
    std::vector<std::size_t> order(g.loss.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return g.loss[a] < g.loss[b]; });
    double cum = 0.0;
    double l = est.expected_loss;
    for (std::size_t i : order) {
        if (cum >= q) {
            break;
        }
        cum += g.cell_mass[i];
        g.mask.inside[i] = 1;
        l = g.loss[i];
    }
    // Ties at the threshold belong to the closed region.
    for (std::size_t i = 0; i < g.loss.size(); ++i) {
        if (!g.mask.inside[i] && g.loss[i] <= l) {
            g.mask.inside[i] = 1;
            cum += g.cell_mass[i];
        }
    }

    LplRegion region;
    region.family = model.kind();
    region.method = method;
    region.level = q;
    region.threshold = l;
    region.mass_tol = mass_tol;
    region.estimate = est.point;
    region.estimate_loss = est.expected_loss;
    region.mass = cum;
    region.mask = std::move(g.mask);
    if (std::abs(cum - q) > mass_tol) {
        throw Error(ErrorCode::GridTooCoarse,
                    "grid mass " + std::to_string(cum) + " differs from the level by more than mass_tol", "grid");
    }
    return region;
}

}  // namespace

std::size_t GridMask::count() const
{
    return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), std::uint8_t{1}));
}

bool GridMask::contains(double px, double py) const
{
    if (!(px >= x.lo && px <= x.hi && py >= y.lo && py <= y.hi)) {
        return false;
    }
    const auto ix = std::min(static_cast<std::size_t>((px - x.lo) / dx()), nx - 1);
    const auto iy = std::min(static_cast<std::size_t>((py - y.lo) / dy()), ny - 1);
    return inside[iy * nx + ix] != 0;
}

std::vector<GridMask::Run> GridMask::runs() const
{
    std::vector<Run> out;
    for (std::size_t iy = 0; iy < ny; ++iy) {
        std::size_t ix = 0;
        while (ix < nx) {
            if (!inside[iy * nx + ix]) {
                ++ix;
                continue;
            }
            const std::size_t start = ix;
            while (ix < nx && inside[iy * nx + ix]) {
                ++ix;
            }
            out.push_back({y_centre(iy), x.lo + static_cast<double>(start) * dx(), x.lo + static_cast<double>(ix) * dx()});
        }
    }
    return out;
}

LplRegion lpl_region(const Model& model, Method method, double q, const RegionOptions& options)
{
    check_level(q);
    if (is_grid_family(model.kind())) {
        return region_2d(model, method, q, options);
    }
    return region_1d(model, method, q, options);
}

LplRegion region_2d(const Model& model, Method method, double q, const RegionOptions& options)
{
    check_level(q);
    if (options.transform) {
        throw Error(ErrorCode::InvalidArgument, "transformed coordinates are supported for 1D regions only",
                    "transform");
    }
    switch (model.kind()) {
    case FamilyKind::NormalMeanVar: return normal_region(static_cast<const NormalModel&>(model), method, q, options);
    case FamilyKind::TwoLevelNormal:
        return two_level_region(static_cast<const TwoLevelNormalModel&>(model), method, q, options);
    default: break;
    }
    throw Error(ErrorCode::InvalidArgument, "grid regions need a two-parameter family", "family");
}

bool region_contains(const LplRegion& region, const ParamPoint& point)
{
    if (region.mask) {
        if (point.size() != 2) {
            throw Error(ErrorCode::InvalidParam, "expected a two-coordinate point", "point");
        }
        return region.mask->contains(point[0], point[1]);
    }
    if (point.size() != 1) {
        throw Error(ErrorCode::InvalidParam, "expected a one-coordinate point", "point");
    }
    return std::any_of(region.intervals.begin(), region.intervals.end(),
                       [&](const Interval& iv) { return iv.contains(point[0]); });
}

double sublevel_mass(const Model& model, Method method, double level)
{
    switch (model.kind()) {
    case FamilyKind::NormalMeanVar:
        return NormalSublevel(static_cast<const NormalModel&>(model), method).mass(level);
    case FamilyKind::TwoLevelNormal: {
        const auto& m = static_cast<const TwoLevelNormalModel&>(model);
        const detail::TwoLevelLoss loss(m, method);
        const auto g = two_level_grid(m, loss, {});
        double total = 0.0;
        for (std::size_t i = 0; i < g.loss.size(); ++i) {
            if (g.loss[i] <= level) {
                total += g.cell_mass[i];
            }
        }
        return total;
    }
    default: break;
    }
    const Problem1d problem(model, method, std::nullopt);
    if (level < problem.sublevel->d_star()) {
        return 0.0;
    }
    return problem.sublevel->mass(level);
}

}  // namespace ripe
