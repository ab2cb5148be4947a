#include <cmath>

#include "losses.hpp"
#include "ripe/error.hpp"

namespace ripe::detail {

MonteCarloLoss::MonteCarloLoss(const Model& model, Method method, const EstimateOptions& options,
                               std::unique_ptr<LossFunction> exact)
    : model_(model), method_(method), numeric_nuisance_(options.numeric_nuisance), exact_(std::move(exact))
{
    if (options.mc_samples < 1000) {
        throw Error(ErrorCode::InvalidArgument, "Monte Carlo evaluation needs at least 1000 draws", "mc_samples");
    }
    // The mean-only predictive criterion is a one-dimensional integral already.
    delegate_exact_ = model.kind() == FamilyKind::NormalMeanOnly && method == Method::PredictiveCriterion;
    if (delegate_exact_) {
        return;
    }
    RngEngine engine(options.stream);
    draws_.reserve(options.mc_samples);
    for (std::size_t i = 0; i < options.mc_samples; ++i) {
        draws_.push_back(model.sample_posterior(engine));
    }
}

std::pair<double, double> MonteCarloLoss::mean_and_stderr(const ParamPoint& tilde) const
{
    // Welford accumulation keeps the variance accurate for large samples.
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t count = 0;
    for (const auto& draw : draws_) {
        const double x = pointwise_loss(model_, method_, draw, tilde, numeric_nuisance_);
        if (!std::isfinite(x)) {
            throw Error(ErrorCode::NonFiniteObjective, "pointwise loss is not finite at a posterior draw");
        }
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }
    const double var = m2 / static_cast<double>(count - 1);
    return {mean, std::sqrt(var / static_cast<double>(count))};
}

double MonteCarloLoss::value(const ParamPoint& tilde) const
{
    if (delegate_exact_) {
        return exact_->value(tilde);
    }
    return mean_and_stderr(tilde).first;
}

double MonteCarloLoss::standard_error(const ParamPoint& tilde) const
{
    if (delegate_exact_) {
        return 0.0;
    }
    return mean_and_stderr(tilde).second;
}

}  // namespace ripe::detail
