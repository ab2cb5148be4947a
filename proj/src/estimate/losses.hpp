#pragma once

// Concrete expected-loss objectives. Internal to the library; regions and
// coverage use the closed-form pieces directly.

#include <algorithm>
#include <cmath>
#include <vector>

#include "ripe/error.hpp"
#include "ripe/estimate.hpp"
#include "ripe/models.hpp"

namespace ripe::detail {

QuadratureSpec tight_quadrature(Interval domain, std::vector<double> breakpoints = {});

class BinomialLoss final : public LossFunction {
public:
    BinomialLoss(const BinomialModel& model, Method method);

    std::size_t dimension() const override { return 1; }
    double value(const ParamPoint& tilde) const override { return value_at(tilde[0]); }
    std::optional<double> partial(const ParamPoint& tilde, std::size_t coord) const override;
    std::vector<Interval> search_box() const override { return {{1e-6, 1.0 - 1e-6}}; }
    std::vector<bool> log_scale() const override { return {false}; }
    ParamPoint start() const override { return {m_}; }
    std::vector<double> scale() const override;

    /// Defined on the closed interval [0, 1]; may be +inf at the ends.
    double value_at(double theta) const;
    double derivative_at(double theta) const;

private:
    Method method_;
    double a_;
    double b_;
    double m_;
    double c1_;
    double psi_a_;
    double psi_b_;
    double psi_ab_;
    double log_beta_;
};

class ExponentialLoss final : public LossFunction {
public:
    ExponentialLoss(const ExponentialModel& model, Method method);

    std::size_t dimension() const override { return 1; }
    double value(const ParamPoint& tilde) const override { return value_at(tilde[0]); }
    std::optional<double> partial(const ParamPoint& tilde, std::size_t coord) const override;
    std::vector<Interval> search_box() const override;
    std::vector<bool> log_scale() const override { return {true}; }
    ParamPoint start() const override { return {n_ / t_}; }
    std::vector<double> scale() const override { return {std::sqrt(static_cast<double>(n_)) / t_}; }

    double value_at(double theta) const;
    double derivative_at(double theta) const;

private:
    Method method_;
    int n_;
    double t_;
    double psi_n_;
};

class UniformLoss final : public LossFunction {
public:
    UniformLoss(const UniformModel& model, Method method);

    std::size_t dimension() const override { return 1; }
    double value(const ParamPoint& tilde) const override { return value_at(tilde[0]); }
    std::optional<double> partial(const ParamPoint& tilde, std::size_t coord) const override;
    std::vector<Interval> search_box() const override;
    std::vector<bool> log_scale() const override { return {true}; }
    ParamPoint start() const override { return {t_ * (1.0 + 1.0 / n_)}; }
    std::vector<double> scale() const override { return {t_ / n_}; }

    double value_at(double theta) const;
    double derivative_at(double theta) const;

private:
    int n_;
    double t_;
};

/// Normal with unknown mean and variance. Every method's expected loss has
/// the form A(sigma) + B(sigma) * (mu - ybar)^2.
class NormalJointLoss final : public LossFunction {
public:
    NormalJointLoss(const NormalModel& model, Method method);

    std::size_t dimension() const override { return 2; }
    double value(const ParamPoint& tilde) const override;
    std::optional<double> partial(const ParamPoint& tilde, std::size_t coord) const override;
    std::vector<Interval> search_box() const override;
    std::vector<bool> log_scale() const override { return {false, true}; }
    ParamPoint start() const override;
    std::vector<double> scale() const override;

    struct Profile {
        double a = 0.0;
        double b = 0.0;
        double da = 0.0;  // d/d sigma of A
        double db = 0.0;  // d/d sigma of B
    };
    Profile profile(double sigma) const;
    double ybar() const { return ybar_; }

private:
    Method method_;
    int n_;
    double ybar_;
    double sum_sq_;
    double nu_;
    double shape_;  // of 1/sigma^2 ~ Gamma(shape, rate)
    double rate_;
    double mean_log_x_;
};

/// Normal mean with sigma as a nuisance parameter.
class NormalMeanOnlyLoss final : public LossFunction {
public:
    NormalMeanOnlyLoss(const NormalModel& model, Method method);

    std::size_t dimension() const override { return 1; }
    double value(const ParamPoint& tilde) const override { return value_at(tilde[0]); }
    std::optional<double> partial(const ParamPoint& tilde, std::size_t coord) const override;
    std::vector<Interval> search_box() const override;
    std::vector<bool> log_scale() const override { return {false}; }
    ParamPoint start() const override { return {model_.ybar()}; }
    std::vector<double> scale() const override;

    double value_at(double mu) const;

private:
    const NormalModel& model_;
    Method method_;
    double shape_;
    double rate_;
};

/// Two-level normal: exact expectation over the tau grid, analytic over mu | tau.
class TwoLevelLoss final : public LossFunction {
public:
    TwoLevelLoss(const TwoLevelNormalModel& model, Method method);

    std::size_t dimension() const override { return 2; }
    double value(const ParamPoint& tilde) const override;
    std::vector<Interval> search_box() const override;
    std::vector<bool> log_scale() const override { return {false, true}; }
    ParamPoint start() const override;
    std::vector<double> scale() const override;

private:
    const TwoLevelNormalModel& model_;
    Method method_;
    // Group predictive under each grid tau, indexed [k * groups + j].
    std::vector<double> pa_;
    std::vector<double> pb_;
    std::vector<double> pv_;
    std::vector<double> log_pv_;
    std::vector<double> sd_;  // posterior sd of mu at each grid tau
};

/// Sample average over posterior draws fixed at construction.
class MonteCarloLoss final : public LossFunction {
public:
    MonteCarloLoss(const Model& model, Method method, const EstimateOptions& options,
                   std::unique_ptr<LossFunction> exact);

    std::size_t dimension() const override { return exact_->dimension(); }
    double value(const ParamPoint& tilde) const override;
    double standard_error(const ParamPoint& tilde) const override;
    std::vector<Interval> search_box() const override { return exact_->search_box(); }
    std::vector<bool> log_scale() const override { return exact_->log_scale(); }
    ParamPoint start() const override { return exact_->start(); }
    std::vector<double> scale() const override { return exact_->scale(); }
    std::size_t mc_samples() const override { return draws_.size(); }

private:
    std::pair<double, double> mean_and_stderr(const ParamPoint& tilde) const;

    const Model& model_;
    Method method_;
    bool numeric_nuisance_;
    bool delegate_exact_ = false;  // no pointwise form worth sampling
    std::unique_ptr<LossFunction> exact_;
    std::vector<ParamPoint> draws_;
};

/// Loss expressed in a monotone transform of one coordinate.
class TransformedLoss final : public LossFunction {
public:
    TransformedLoss(const LossFunction& base, const Transform& t) : base_(base), t_(t)
    {
        if (t.coordinate >= base.dimension()) {
            throw Error(ErrorCode::InvalidArgument, "transform coordinate out of range", "transform");
        }
        const auto box = base.search_box()[t.coordinate];
        const double f_lo = t.forward(box.lo);
        const double f_hi = t.forward(box.hi);
        if (!std::isfinite(f_lo) || !std::isfinite(f_hi) || f_lo == f_hi) {
            throw Error(ErrorCode::InvalidArgument, "transform is not finite and monotone on the search box",
                        "transform");
        }
        box_ = {std::min(f_lo, f_hi), std::max(f_lo, f_hi)};
    }

    std::size_t dimension() const override { return base_.dimension(); }
    double value(const ParamPoint& phi) const override { return base_.value(back(phi)); }

    std::optional<double> partial(const ParamPoint& phi, std::size_t coord) const override
    {
        const auto p = base_.partial(back(phi), coord);
        if (!p || coord != t_.coordinate) {
            return p;
        }
        if (!t_.inverse_derivative) {
            return std::nullopt;
        }
        return *p * t_.inverse_derivative(phi[coord]);
    }

    double standard_error(const ParamPoint& phi) const override { return base_.standard_error(back(phi)); }

    std::vector<Interval> search_box() const override
    {
        auto box = base_.search_box();
        box[t_.coordinate] = box_;
        return box;
    }

    std::vector<bool> log_scale() const override
    {
        auto flags = base_.log_scale();
        flags[t_.coordinate] = box_.lo > 0.0 && box_.hi / box_.lo > 100.0;
        return flags;
    }

    ParamPoint start() const override
    {
        auto s = base_.start();
        s[t_.coordinate] = t_.forward(s[t_.coordinate]);
        return s;
    }

    std::vector<double> scale() const override
    {
        auto s = base_.scale();
        const std::size_t c = t_.coordinate;
        const double x = base_.start()[c];
        const auto box = base_.search_box()[c];
        const double h = std::min({s[c], 0.5 * (x - box.lo), 0.5 * (box.hi - x)});
        s[c] = std::abs(t_.forward(x + h) - t_.forward(x - h)) / (2.0 * h) * s[c];
        return s;
    }

    std::size_t mc_samples() const override { return base_.mc_samples(); }

    ParamPoint back(ParamPoint phi) const
    {
        phi[t_.coordinate] = t_.inverse(phi[t_.coordinate]);
        return phi;
    }

private:
    const LossFunction& base_;
    const Transform& t_;
    Interval box_;
};

}  // namespace ripe::detail
