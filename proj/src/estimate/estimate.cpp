#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "losses.hpp"
#include "ripe/error.hpp"
#include "ripe/estimate.hpp"
#include "ripe/special.hpp"

namespace ripe {
namespace {

constexpr double kLog2Pi = 1.83787706640934548356;

double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

template <class M>
const M& as(const Model& model)
{
    return static_cast<const M&>(model);
}

// Maps between natural and search coordinates.
struct Coordinates {
    std::vector<bool> log;

    double to_search(std::size_t c, double x) const { return log[c] ? std::log(x) : x; }
    double to_natural(std::size_t c, double u) const { return log[c] ? std::exp(u) : u; }
    double jacobian(std::size_t c, double u) const { return log[c] ? std::exp(u) : 1.0; }
};

double pointwise_predictive(const Model& model, const ParamPoint& full, const ParamPoint& tilde)
{
    switch (model.kind()) {
    case FamilyKind::Binomial: {
        const double th = full[0];
        return -(xlogy(th, tilde[0]) + xlogy(1.0 - th, 1.0 - tilde[0]));
    }
    case FamilyKind::Exponential: return tilde[0] / full[0] - std::log(tilde[0]);
    case FamilyKind::UniformScale:
        throw Error(ErrorCode::DegenerateCriterion, "predictive criterion degenerates for the uniform model",
                    "method");
    case FamilyKind::NormalMeanVar: {
        const double v = tilde[1] * tilde[1];
        const double d = full[0] - tilde[0];
        return 0.5 * (kLog2Pi + std::log(v)) + (d * d + full[1] * full[1]) / (2.0 * v);
    }
    case FamilyKind::NormalMeanOnly: {
        const auto& m = as<NormalModel>(model);
        const auto restricted = m.restricted_predictive(tilde[0]);
        const auto sampling = Distribution::normal(full[0], full[1] * full[1]);
        auto f = [&](double y) {
            const double w = std::exp(log_density(sampling, y));
            return w == 0.0 ? 0.0 : -log_density(restricted, y) * w;
        };
        return integrate_1d(f, detail::tight_quadrature({-kInf, kInf}, {full[0], tilde[0]})).value;
    }
    case FamilyKind::TwoLevelNormal: {
        const auto& m = as<TwoLevelNormalModel>(model);
        double total = 0.0;
        for (std::size_t j = 0; j < m.groups(); ++j) {
            const auto f = m.group_predictive(j, full[1]);
            const auto g = m.group_predictive(j, tilde[1]);
            const double d = (f.a + f.b * full[0]) - (g.a + g.b * tilde[0]);
            total += 0.5 * (kLog2Pi + std::log(g.var)) + (d * d + f.var) / (2.0 * g.var);
        }
        return total;
    }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown family");
}

void require_applicable(const Model& model, Method method)
{
    if (model.kind() == FamilyKind::UniformScale && method != Method::IntrinsicD3) {
        // The loss constructors carry the specific diagnosis.
        (void)detail::UniformLoss(as<UniformModel>(model), method);
    }
}

}  // namespace

std::string_view method_name(Method m)
{
    switch (m) {
    case Method::PredictiveCriterion: return "pc";
    case Method::IntrinsicD1: return "d1";
    case Method::IntrinsicD2: return "d2";
    case Method::IntrinsicD3: return "d3";
    }
    return "unknown";
}

Method parse_method(std::string_view name)
{
    if (name == "pc" || name == "PredictiveCriterion" || name == "predictive") {
        return Method::PredictiveCriterion;
    }
    if (name == "d1" || name == "IntrinsicD1") {
        return Method::IntrinsicD1;
    }
    if (name == "d2" || name == "IntrinsicD2") {
        return Method::IntrinsicD2;
    }
    if (name == "d3" || name == "IntrinsicD3") {
        return Method::IntrinsicD3;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown method '" + std::string(name) + "'", "method");
}

KlDirection direction_of(Method m)
{
    switch (m) {
    case Method::PredictiveCriterion:
    case Method::IntrinsicD1: return KlDirection::FullToRestricted;
    case Method::IntrinsicD2: return KlDirection::RestrictedToFull;
    case Method::IntrinsicD3: return KlDirection::Symmetric;
    }
    return KlDirection::FullToRestricted;
}

std::unique_ptr<LossFunction> make_loss(const Model& model, Method method, const EstimateOptions& options)
{
    std::unique_ptr<LossFunction> exact;
    switch (model.kind()) {
    case FamilyKind::Binomial:
        exact = std::make_unique<detail::BinomialLoss>(as<BinomialModel>(model), method);
        break;
    case FamilyKind::Exponential:
        exact = std::make_unique<detail::ExponentialLoss>(as<ExponentialModel>(model), method);
        break;
    case FamilyKind::UniformScale:
        exact = std::make_unique<detail::UniformLoss>(as<UniformModel>(model), method);
        break;
    case FamilyKind::NormalMeanVar:
        exact = std::make_unique<detail::NormalJointLoss>(as<NormalModel>(model), method);
        break;
    case FamilyKind::NormalMeanOnly:
        exact = std::make_unique<detail::NormalMeanOnlyLoss>(as<NormalModel>(model), method);
        break;
    case FamilyKind::TwoLevelNormal:
        exact = std::make_unique<detail::TwoLevelLoss>(as<TwoLevelNormalModel>(model), method);
        break;
    }
    if (options.evaluation == Evaluation::MonteCarlo) {
        return std::make_unique<detail::MonteCarloLoss>(model, method, options, std::move(exact));
    }
    return exact;
}

double predictive_criterion(const Model& model, const ParamPoint& tilde, const EstimateOptions& options)
{
    model.validate_point(tilde);
    return -make_loss(model, Method::PredictiveCriterion, options)->value(tilde);
}

double expected_intrinsic_loss(const Model& model, Method method, const ParamPoint& tilde,
                               const EstimateOptions& options)
{
    if (method == Method::PredictiveCriterion) {
        throw Error(ErrorCode::InvalidArgument, "expected_intrinsic_loss needs an intrinsic method", "method");
    }
    model.validate_point(tilde);
    return make_loss(model, method, options)->value(tilde);
}

double pointwise_loss(const Model& model, Method method, const ParamPoint& full, const ParamPoint& tilde,
                      bool numeric_nuisance)
{
    if (method == Method::PredictiveCriterion) {
        return pointwise_predictive(model, full, tilde);
    }
    if (model.kind() == FamilyKind::NormalMeanOnly) {
        const auto& m = as<NormalModel>(model);
        auto project = [&](KlDirection dir) {
            return numeric_nuisance ? m.project_nuisance_numeric(tilde, full, dir) : m.project_nuisance(tilde, full, dir);
        };
        switch (method) {
        case Method::IntrinsicD1: return m.kl(full, project(KlDirection::FullToRestricted));
        case Method::IntrinsicD2: return m.kl(project(KlDirection::RestrictedToFull), full);
        default: {
            const auto r1 = project(KlDirection::FullToRestricted);
            const auto r2 = project(KlDirection::RestrictedToFull);
            return std::min(m.kl(full, r1), m.kl(r2, full));
        }
        }
    }
    switch (method) {
    case Method::IntrinsicD1: return model.kl(full, tilde);
    case Method::IntrinsicD2: return model.kl(tilde, full);
    default: return std::min(model.kl(full, tilde), model.kl(tilde, full));
    }
}

ExpectedLossCurve loss_curve(const Model& model, Method method, const std::vector<ParamPoint>& grid,
                             const EstimateOptions& options)
{
    ExpectedLossCurve curve;
    curve.method = method;
    curve.grid = grid;
    for (const auto& p : grid) {
        model.validate_point(p);
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (grid[i].size() == 1 && !(grid[i][0] > grid[i - 1][0])) {
            throw Error(ErrorCode::InvalidArgument, "grid must be strictly increasing", "grid");
        }
    }
    std::unique_ptr<LossFunction> loss;
    try {
        loss = make_loss(model, method, options);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::DivergentLoss && e.code() != ErrorCode::DegenerateCriterion) {
            throw;
        }
        curve.values.assign(grid.size(), kInf);
        curve.flags.assign(grid.size(), std::string(error_code_name(e.code())));
        return curve;
    }
    const bool mc = options.evaluation == Evaluation::MonteCarlo;
    curve.flags.assign(grid.size(), "");
    for (const auto& p : grid) {
        curve.values.push_back(loss->value(p));
        if (mc) {
            curve.mc_stderr.push_back(loss->standard_error(p));
        }
    }
    return curve;
}

std::optional<ClosedForm> closed_form_estimate(const Model& model, Method method)
{
    switch (model.kind()) {
    case FamilyKind::Binomial: {
        const auto& m = as<BinomialModel>(model);
        const double n = m.n();
        const double r = m.r();
        switch (method) {
        case Method::PredictiveCriterion:
        case Method::IntrinsicD1: return ClosedForm{{(r + 0.5) / (n + 1.0)}, false, "(r+1/2)/(n+1)"};
        case Method::IntrinsicD2: {
            const double ea = std::exp(digamma(m.a()));
            const double eb = std::exp(digamma(m.b()));
            return ClosedForm{{ea / (ea + eb)}, false, "exp psi(a)/(exp psi(a)+exp psi(b))"};
        }
        case Method::IntrinsicD3: return ClosedForm{{(r + 1.0 / 3.0) / (n + 2.0 / 3.0)}, true, "(r+1/3)/(n+2/3)"};
        }
        break;
    }
    case FamilyKind::Exponential: {
        const auto& m = as<ExponentialModel>(model);
        const double n = m.n();
        const double t = m.t();
        switch (method) {
        case Method::PredictiveCriterion:
        case Method::IntrinsicD1:
            if (m.n() < 2) {
                return std::nullopt;
            }
            return ClosedForm{{(n - 1.0) / t}, false, "(n-1)/t"};
        case Method::IntrinsicD2: return ClosedForm{{n / t}, false, "n/t"};
        case Method::IntrinsicD3: return ClosedForm{{(n - 0.5) / t}, true, "(n-1/2)/t"};
        }
        break;
    }
    case FamilyKind::UniformScale: {
        if (method != Method::IntrinsicD3) {
            return std::nullopt;
        }
        const auto& m = as<UniformModel>(model);
        return ClosedForm{{std::pow(2.0, 1.0 / m.n()) * m.t()}, false, "2^(1/n) t"};
    }
    case FamilyKind::NormalMeanVar: {
        const auto& m = as<NormalModel>(model);
        const double nu = m.nu();
        const double s = m.sum_sq();
        switch (method) {
        case Method::PredictiveCriterion:
        case Method::IntrinsicD1:
            if (nu <= 2.0) {
                return std::nullopt;
            }
            return ClosedForm{{m.ybar(), std::sqrt((1.0 + 1.0 / m.n()) * s / (nu - 2.0))}, false,
                              "mu = ybar, sigma = sqrt(E[sigma^2 + (mu - ybar)^2])"};
        case Method::IntrinsicD2: return ClosedForm{{m.ybar(), std::sqrt(s / nu)}, false, "mu = ybar, sigma = sqrt(S/nu)"};
        case Method::IntrinsicD3: return std::nullopt;
        }
        break;
    }
    case FamilyKind::NormalMeanOnly:
        return ClosedForm{{as<NormalModel>(model).ybar()}, false, "mu = ybar"};
    case FamilyKind::TwoLevelNormal: return std::nullopt;
    }
    return std::nullopt;
}

EstimateResult minimize_loss(const LossFunction& loss, const EstimateOptions& options)
{
    const std::size_t dim = loss.dimension();
    const Coordinates coords{loss.log_scale()};
    const auto box = loss.search_box();
    const auto start = loss.start();
    const auto scale = loss.scale();
    int evaluations = 0;

    std::vector<Interval> box_u(dim);
    std::vector<double> start_u(dim);
    std::vector<double> scale_u(dim);
    for (std::size_t c = 0; c < dim; ++c) {
        box_u[c] = {coords.to_search(c, box[c].lo), coords.to_search(c, box[c].hi)};
        start_u[c] = std::clamp(coords.to_search(c, start[c]), box_u[c].lo, box_u[c].hi);
        scale_u[c] = coords.log[c] ? std::min(scale[c] / start[c], 1.0) : scale[c];
    }
    auto natural = [&](std::span<const double> u) {
        ParamPoint x(dim);
        for (std::size_t c = 0; c < dim; ++c) {
            x[c] = coords.to_natural(c, u[c]);
        }
        return x;
    };

    // Line search along one coordinate with the others held at `base`.
    auto line_minimize = [&](std::vector<double>& u, std::size_t c, Interval range, bool scan) {
        auto f = [&](double s) {
            std::vector<double> v = u;
            v[c] = s;
            ++evaluations;
            return loss.value(natural(v));
        };
        ScalarFunction df;
        if (loss.partial(natural(u), c)) {
            df = [&](double s) {
                std::vector<double> v = u;
                v[c] = s;
                const auto p = loss.partial(natural(v), c);
                return p ? *p * coords.jacobian(c, s) : std::numeric_limits<double>::quiet_NaN();
            };
        }
        const auto r = scan ? minimize_1d_scan(f, range, options.tol, df) : minimize_1d(f, range, options.tol, df);
        if (r.min_value <= f(u[c])) {
            u[c] = r.argmin[0];
        }
    };

    std::vector<double> u = start_u;
    if (dim == 1) {
        line_minimize(u, 0, box_u[0], true);
    } else {
        auto objective = [&](std::span<const double> v) {
            for (std::size_t c = 0; c < dim; ++c) {
                if (v[c] < box_u[c].lo || v[c] > box_u[c].hi) {
                    return kInf;
                }
            }
            ++evaluations;
            return loss.value(natural(v));
        };
        NelderMeadOptions nm;
        nm.tol = options.tol;
        const auto r = minimize_nd(objective, start_u, scale_u, nm);
        u = r.argmin;
        for (int sweep = 0; sweep < 4; ++sweep) {
            const std::vector<double> before = u;
            for (std::size_t c = 0; c < dim; ++c) {
                const Interval range{std::max(box_u[c].lo, u[c] - 3.0 * scale_u[c]),
                                     std::min(box_u[c].hi, u[c] + 3.0 * scale_u[c])};
                line_minimize(u, c, range, false);
            }
            double moved = 0.0;
            for (std::size_t c = 0; c < dim; ++c) {
                moved = std::max(moved, std::abs(u[c] - before[c]) / scale_u[c]);
            }
            if (moved <= options.tol) {
                break;
            }
        }
    }

    EstimateResult result;
    result.point = natural(u);
    result.expected_loss = loss.value(result.point);
    result.diagnostics.evaluations = evaluations;
    result.diagnostics.mc_samples = loss.mc_samples();
    result.diagnostics.mc_stderr = loss.standard_error(result.point);
    return result;
}

EstimateResult point_estimate(const Model& model, Method method, const EstimateOptions& options)
{
    require_applicable(model, method);
    const auto loss = make_loss(model, method, options);
    EstimateResult result = minimize_loss(*loss, options);
    result.method = method;
    const auto cf = closed_form_estimate(model, method);
    result.diagnostics.closed_form = cf;
    if (!cf || cf->approximate || options.evaluation != Evaluation::Exact) {
        return result;
    }
    const auto scale = loss->scale();
    for (std::size_t c = 0; c < cf->point.size(); ++c) {
        const double tol = 1e-6 * (std::abs(cf->point[c]) + scale[c]);
        if (!(std::abs(cf->point[c] - result.point[c]) <= tol)) {
            throw Error(ErrorCode::NonConvergence,
                        "numeric optimum " + std::to_string(result.point[c]) + " disagrees with closed form " +
                            std::to_string(cf->point[c]) + " (" + cf->formula + ")");
        }
    }
    result.diagnostics.numeric_point = result.point;
    result.diagnostics.closed_form_used = true;
    result.point = cf->point;
    result.expected_loss = loss->value(result.point);
    return result;
}

Transform Transform::identity(std::size_t coordinate)
{
    return {"identity", [](double x) { return x; }, [](double p) { return p; }, [](double) { return 1.0; },
            coordinate};
}

Transform Transform::log(std::size_t coordinate)
{
    return {"log", [](double x) { return std::log(x); }, [](double p) { return std::exp(p); },
            [](double p) { return std::exp(p); }, coordinate};
}

Transform Transform::reciprocal(std::size_t coordinate)
{
    return {"reciprocal", [](double x) { return 1.0 / x; }, [](double p) { return 1.0 / p; },
            [](double p) { return -1.0 / (p * p); }, coordinate};
}

Transform Transform::logit(std::size_t coordinate)
{
    return {"logit", [](double x) { return std::log(x) - std::log1p(-x); },
            [](double p) { return 1.0 / (1.0 + std::exp(-p)); },
            [](double p) {
                const double s = 1.0 / (1.0 + std::exp(-p));
                return s * (1.0 - s);
            },
            coordinate};
}

Transform Transform::square(std::size_t coordinate)
{
    return {"square", [](double x) { return x * x; }, [](double p) { return std::sqrt(p); },
            [](double p) { return 0.5 / std::sqrt(p); }, coordinate};
}

Transform Transform::power(double exponent, std::size_t coordinate)
{
    if (exponent == 0.0 || !std::isfinite(exponent)) {
        throw Error(ErrorCode::InvalidArgument, "power transform needs a finite nonzero exponent", "transform");
    }
    return {"power", [exponent](double x) { return std::pow(x, exponent); },
            [exponent](double p) { return std::pow(p, 1.0 / exponent); },
            [exponent](double p) { return std::pow(p, 1.0 / exponent - 1.0) / exponent; }, coordinate};
}

EstimateResult reparameterize_estimate(const Model& model, Method method, const Transform& transform,
                                       const EstimateOptions& options)
{
    if (transform.name == "identity") {
        return point_estimate(model, method, options);
    }
    require_applicable(model, method);
    const auto loss = make_loss(model, method, options);
    const detail::TransformedLoss wrapped(*loss, transform);
    EstimateResult result = minimize_loss(wrapped, options);
    result.point = wrapped.back(result.point);
    result.method = method;
    result.expected_loss = loss->value(result.point);
    result.diagnostics.closed_form = closed_form_estimate(model, method);
    return result;
}

}  // namespace ripe
