#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ripe/models.hpp"
#include "ripe/numerics.hpp"
#include "ripe/rng.hpp"

namespace ripe {

enum class Method {
    PredictiveCriterion,
    IntrinsicD1,  // KL from the full model to the restricted one
    IntrinsicD2,  // KL from the restricted model to the full one
    IntrinsicD3,  // pointwise minimum of the two
};

std::string_view method_name(Method m);

/// Accepts "pc", "d1", "d2", "d3" and the enum spellings. Throws InvalidArgument.
Method parse_method(std::string_view name);

KlDirection direction_of(Method m);

enum class Evaluation {
    Exact,       // closed forms and adaptive quadrature
    MonteCarlo,  // posterior draws, shared by every candidate point
};

struct EstimateOptions {
    std::size_t mc_samples = 200000;
    RngStream stream{0, 0};
    Evaluation evaluation = Evaluation::Exact;
    /// Resolve the nuisance sigma of NormalMeanOnly by numeric inner
    /// minimization instead of the closed-form projection (Monte Carlo only).
    bool numeric_nuisance = false;
    double tol = 1e-8;
};

/// Posterior expected loss over the estimable point. For the predictive
/// criterion the value is the negated criterion, so smaller is always better.
class LossFunction {
public:
    virtual ~LossFunction() = default;

    virtual std::size_t dimension() const = 0;
    virtual double value(const ParamPoint& tilde) const = 0;

    /// Partial derivative along one coordinate, when available in closed form
    /// or by quadrature.
    virtual std::optional<double> partial(const ParamPoint& /*tilde*/, std::size_t /*coord*/) const
    {
        return std::nullopt;
    }

    /// Monte Carlo standard error of value(), zero for exact evaluation.
    virtual double standard_error(const ParamPoint& /*tilde*/) const { return 0.0; }

    /// Box for the optimizer, in natural coordinates.
    virtual std::vector<Interval> search_box() const = 0;

    /// Coordinates that are strictly positive and searched on the log scale.
    virtual std::vector<bool> log_scale() const = 0;

    virtual ParamPoint start() const = 0;

    /// Typical posterior spread of each coordinate.
    virtual std::vector<double> scale() const = 0;

    virtual std::size_t mc_samples() const { return 0; }
};

/// Throws DivergentLoss or DegenerateCriterion when the expectation does not exist.
std::unique_ptr<LossFunction> make_loss(const Model& model, Method method, const EstimateOptions& options = {});

/// Expected log predictive density of the restricted model under the full
/// model's posterior predictive, per future observation.
double predictive_criterion(const Model& model, const ParamPoint& tilde, const EstimateOptions& options = {});

double expected_intrinsic_loss(const Model& model, Method method, const ParamPoint& tilde,
                               const EstimateOptions& options = {});

/// Intrinsic discrepancy between one full-model draw and a restricted point,
/// with any nuisance coordinate projected out. PredictiveCriterion gives the
/// negated expected log score of the restricted predictive under p(y | full).
double pointwise_loss(const Model& model, Method method, const ParamPoint& full, const ParamPoint& tilde,
                      bool numeric_nuisance = false);

struct ExpectedLossCurve {
    Method method = Method::PredictiveCriterion;
    std::vector<ParamPoint> grid;
    std::vector<double> values;
    std::vector<double> mc_stderr;     // empty for exact evaluation
    std::vector<std::string> flags;    // error code name per point, empty when fine
};

ExpectedLossCurve loss_curve(const Model& model, Method method, const std::vector<ParamPoint>& grid,
                             const EstimateOptions& options = {});

struct ClosedForm {
    ParamPoint point;
    bool approximate = false;
    std::string formula;
};

std::optional<ClosedForm> closed_form_estimate(const Model& model, Method method);

struct EstimateDiagnostics {
    int evaluations = 0;
    std::size_t mc_samples = 0;
    bool closed_form_used = false;
    /// Analytic or approximate solution known for this family and method.
    std::optional<ClosedForm> closed_form;
    /// Optimizer result when the reported point came from the closed form.
    std::optional<ParamPoint> numeric_point;
    double mc_stderr = 0.0;
};

struct EstimateResult {
    ParamPoint point;
    double expected_loss = 0.0;
    Method method = Method::PredictiveCriterion;
    EstimateDiagnostics diagnostics;
};

/// Global minimizer of the expected loss. An exact closed form, when one
/// exists, is returned after checking it against the numeric optimum.
EstimateResult point_estimate(const Model& model, Method method, const EstimateOptions& options = {});

/// Minimization of a loss function in the search coordinates (log scale for
/// positive coordinates), without closed-form shortcuts.
EstimateResult minimize_loss(const LossFunction& loss, const EstimateOptions& options = {});

/// Strictly monotone smooth map applied to one coordinate.
struct Transform {
    std::string name;
    std::function<double(double)> forward;
    std::function<double(double)> inverse;
    std::function<double(double)> inverse_derivative;  // optional: d inverse / d phi
    std::size_t coordinate = 0;

    static Transform identity(std::size_t coordinate = 0);
    static Transform log(std::size_t coordinate = 0);
    static Transform reciprocal(std::size_t coordinate = 0);
    static Transform logit(std::size_t coordinate = 0);
    static Transform square(std::size_t coordinate = 0);
    static Transform power(double exponent, std::size_t coordinate = 0);
};

/// Runs the estimation in the transformed coordinate and maps the result back.
EstimateResult reparameterize_estimate(const Model& model, Method method, const Transform& transform,
                                       const EstimateOptions& options = {});

}  // namespace ripe
